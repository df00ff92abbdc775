import json

import pytest

from quasidp.cli import main
from conftest import TWO_STATE_DOC


@pytest.fixture
def model_file(tmp_path):
    path = tmp_path / "m.json"
    assert main(["gen", "--states", "5", "--controls", "2", "--discount", "0.9",
                 "--seed", "3", "--out", str(path)]) == 0
    return path


class TestGen:
    def test_roundtrip_validates(self, model_file):
        from quasidp import load_model
        m = load_model(model_file)
        assert m.n_states == 5

    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for out in (a, b):
            main(["gen", "--states", "4", "--controls", "3", "--discount", "0.8",
                  "--seed", "11", "--out", str(out)])
        assert a.read_bytes() == b.read_bytes()

    def test_bad_discount_exits_2(self, tmp_path):
        code = main(["gen", "--states", "2", "--controls", "2", "--discount", "1.0",
                     "--seed", "0", "--out", str(tmp_path / "x.json")])
        assert code == 2


class TestSolve:
    def test_vi_report(self, model_file, tmp_path):
        out = tmp_path / "vi.json"
        assert main(["solve", "--model", str(model_file), "--method", "vi",
                     "--tol", "1e-8", "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert rep["schema_version"] == 1
        assert rep["method"] == "vi"
        assert rep["residual"] <= 1e-8
        assert rep["converged"] is True
        assert len(rep["v_star"]) == 5

    def test_vi_and_enumerate_agree(self, model_file, tmp_path):
        vi_out, en_out = tmp_path / "vi.json", tmp_path / "en.json"
        main(["solve", "--model", str(model_file), "--method", "vi",
              "--tol", "1e-8", "--out", str(vi_out)])
        main(["solve", "--model", str(model_file), "--method", "enumerate",
              "--out", str(en_out)])
        vi = json.loads(vi_out.read_text())["v_star"]
        en = json.loads(en_out.read_text())["v_star"]
        assert max(abs(a - b) for a, b in zip(vi, en)) <= 2e-8

    def test_enumerate_cap_exits_2(self, tmp_path, capsys):
        big = tmp_path / "big.json"
        main(["gen", "--states", "12", "--controls", "4", "--discount", "0.9",
              "--seed", "1", "--out", str(big)])
        code = main(["solve", "--model", str(big), "--method", "enumerate"])
        assert code == 2
        assert "cap" in capsys.readouterr().err

    def test_invalid_model_exits_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(TWO_STATE_DOC.replace("[1.0, 0.0]", "[0.5, 0.4]"))
        assert main(["solve", "--model", str(bad), "--method", "vi"]) == 2

    def test_nonconvergence_exits_3_with_partial_report(self, model_file, tmp_path):
        out = tmp_path / "partial.json"
        code = main(["solve", "--model", str(model_file), "--method", "vi",
                     "--tol", "1e-12", "--max-iters", "2", "--out", str(out)])
        assert code == 3
        rep = json.loads(out.read_text())
        assert rep["converged"] is False
        assert len(rep["v_star"]) == 5

    def test_pi_exact_method(self, model_file, tmp_path):
        out = tmp_path / "pi.json"
        assert main(["solve", "--model", str(model_file), "--method", "pi_exact",
                     "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert rep["residual"] <= 1e-10
        assert "policy" in rep


class TestPir:
    def test_summary_and_traces(self, model_file, tmp_path):
        out = tmp_path / "runs"
        assert main(["pir", "--model", str(model_file), "--lambda", "0.5", "--p", "0.5",
                     "--seeds", "1..5", "--tol", "1e-8", "--out-dir", str(out)]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["converged"] == 5
        assert summary["max_error_vs_oracle"] <= 1e-7
        for seed in range(1, 6):
            assert (out / f"trace_seed{seed}.csv").exists()

    def test_byte_identical_traces(self, model_file, tmp_path):
        flags = ["pir", "--model", str(model_file), "--lambda", "0.5", "--p", "0.5",
                 "--seeds", "7", "--tol", "1e-8"]
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(flags + ["--out-dir", str(a)]) == 0
        assert main(flags + ["--out-dir", str(b)]) == 0
        assert (a / "trace_seed7.csv").read_bytes() == (b / "trace_seed7.csv").read_bytes()

    def test_lambda_zero_invariant_to_p(self, model_file, tmp_path):
        # classical convention: both branches coincide at lambda = 0
        base = ["pir", "--model", str(model_file), "--lambda", "0", "--seeds", "7",
                "--tol", "1e-8", "--convention", "classical_l_plus_1"]
        a, b = tmp_path / "p05", tmp_path / "p09"
        assert main(base + ["--p", "0.5", "--out-dir", str(a)]) == 0
        assert main(base + ["--p", "0.9", "--out-dir", str(b)]) == 0
        ta = (a / "trace_seed7.csv").read_text().splitlines()
        tb = (b / "trace_seed7.csv").read_text().splitlines()
        # branch labels may differ; residual trajectories may not
        ra = [line.split(",")[2] for line in ta[1:]]
        rb = [line.split(",")[2] for line in tb[1:]]
        assert ra == rb

    def test_precondition_exit_4(self, model_file, tmp_path):
        code = main(["pir", "--model", str(model_file), "--v0-shift", "-1.0",
                     "--seeds", "1", "--out-dir", str(tmp_path / "x")])
        assert code == 4

    def test_no_enforce_escape_hatch(self, model_file, tmp_path):
        code = main(["pir", "--model", str(model_file), "--v0-shift", "-1.0",
                     "--seeds", "1", "--no-enforce", "--out-dir", str(tmp_path / "y")])
        assert code == 0

    def test_seed_list_syntax(self, model_file, tmp_path):
        out = tmp_path / "list"
        assert main(["pir", "--model", str(model_file), "--seeds", "2,5,9",
                     "--out-dir", str(out)]) == 0
        for seed in (2, 5, 9):
            assert (out / f"trace_seed{seed}.csv").exists()

    def test_geometric_schedule_flags(self, model_file, tmp_path):
        out = tmp_path / "geo"
        assert main(["pir", "--model", str(model_file), "--p", "0.8", "--p-beta", "0.9",
                     "--p-min", "0.05", "--seeds", "1", "--out-dir", str(out)]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["runs"][0]["config"]["p_schedule"]["type"] == "geometric"
        assert summary["converged"] == 1

    def test_paper_convention_flag(self, model_file, tmp_path):
        out = tmp_path / "paper"
        assert main(["pir", "--model", str(model_file), "--lambda", "0.5",
                     "--convention", "paper_l", "--seeds", "1",
                     "--out-dir", str(out)]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["converged"] == 1


class TestCertify:
    def test_example1_passes(self, tmp_path):
        out = tmp_path / "ex1.json"
        assert main(["certify", "example1", "--pairs", "20000", "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert rep["quasi"]["violations"] == 0
        assert rep["banach"]["violations"] >= 1
        assert rep["passed"] is True

    def test_mdp_ciric_passes(self, model_file, tmp_path):
        out = tmp_path / "ciric.json"
        assert main(["certify", "mdp-ciric", "--model", str(model_file),
                     "--pairs", "2000", "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert rep["optimality"]["max_ratio"] <= 0.9 + 1e-12

    def test_mdp_ciric_fails_at_low_modulus_exit_5(self, model_file, tmp_path):
        out = tmp_path / "fail.json"
        code = main(["certify", "mdp-ciric", "--model", str(model_file),
                     "--pairs", "2000", "--modulus", "0.01", "--out", str(out)])
        assert code == 5
        rep = json.loads(out.read_text())
        assert rep["optimality"]["violations"] > 0
        assert len(rep["optimality"]["worst_pair"][0]) == 5  # counterexample embedded

    def test_bounds_pass(self, model_file, tmp_path):
        out = tmp_path / "bounds.json"
        assert main(["certify", "bounds", "--model", str(model_file),
                     "--samples", "300", "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert rep["optimality_violations"] == 0
        assert rep["policy_violations"] == 0

    def test_lambda_op_pass(self, model_file, tmp_path):
        out = tmp_path / "lam.json"
        assert main(["certify", "lambda-op", "--model", str(model_file),
                     "--lambda", "0.5", "--samples", "50", "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert rep["max_oracle_deviation"] <= 1e-9
