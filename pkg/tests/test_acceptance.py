"""Acceptance suite: every criterion at its stated tolerance and time budget.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL line
per criterion.

Criterion 4a (closed-form modulus vs 100-term partial sums within 1e-12 over
the full (0.1..0.9)^2 grid) is expected to fail at the single grid corner
(0.9, 0.9): the exact remainder of the series after 100 terms is 3.0e-10
there, two orders above the required tolerance, for any implementation.  The
check is implemented as stated and reports honestly.
"""

import time
from dataclasses import replace

import numpy as np
import pytest

from quasidp import (LambdaOperatorConfig, PirConfig, Policy,
                     check_initial_condition,
                     enumerate_policies, epsilon_greedy_policy,
                     exact_policy_value, random_mdp, rho_modulus, run_pir,
                     shift_by_weight, value_iteration, weighted_distance)
from quasidp.certify import (certify_bounds, certify_example1,
                             certify_lambda_op, certify_mdp_ciric,
                             lambda_contraction_sweep)
from quasidp.cli import main as cli_main


def report(number, name, ok, detail):
    print(f"[ACCEPTANCE {number}] {name}: {'PASS' if ok else 'FAIL'} ({detail})")


@pytest.fixture(scope="module")
def model20():
    return random_mdp(20, 4, 0.9, seed=1)


@pytest.fixture(scope="module")
def vstar20(model20):
    return value_iteration(model20, tol=1e-12).value


def test_acceptance_1_mdp_ciric(model20):
    t0 = time.perf_counter()
    rep, ok = certify_mdp_ciric(model20, pairs=10_000, seed=0, modulus=0.9)
    elapsed = time.perf_counter() - t0
    ok = ok and rep["optimality"]["max_ratio"] <= 0.9 + 1e-12 \
        and rep["policy"]["max_ratio"] <= 0.9 + 1e-12 and elapsed <= 10.0
    report(1, "weak-contraction certificate for F and F_mu", ok,
           f"max ratios {rep['optimality']['max_ratio']:.6f} / "
           f"{rep['policy']['max_ratio']:.6f} over 10^4 pairs, {elapsed:.2f}s")
    assert ok


def test_acceptance_2_example1():
    t0 = time.perf_counter()
    rep, ok = certify_example1(pairs=120_000, seed=0)
    elapsed = time.perf_counter() - t0
    ok = ok and rep["quasi"]["pairs_checked"] >= 100_000 \
        and rep["fixed_point"]["max_abs_limit"] <= 1e-12 \
        and rep["fixed_point"]["max_iterations"] <= 200 and elapsed <= 5.0
    report(2, "discontinuous example map", ok,
           f"quasi violations {rep['quasi']['violations']}, banach violations "
           f"{rep['banach']['violations']}, worst fixed-point limit "
           f"{rep['fixed_point']['max_abs_limit']:.2e}, {elapsed:.2f}s")
    assert ok


def test_acceptance_3_residual_bounds(model20):
    t0 = time.perf_counter()
    rep, ok = certify_bounds(model20, samples=1000, seed=0, n_policies=10,
                             per_policy=100, oracle_tol=1e-10)
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed <= 30.0
    report(3, "residual-to-error bounds, optimality and policy", ok,
           f"violations {rep['optimality_violations']} / {rep['policy_violations']}, "
           f"min slacks {rep['optimality_min_slack']:.3f} / {rep['policy_min_slack']:.3f}, "
           f"{elapsed:.2f}s")
    assert ok


def test_acceptance_4a_rho_closed_form_vs_100_terms():
    # as stated: unattainable at (0.9, 0.9), where the exact series remainder
    # after 100 terms is 3.0e-10 > 1e-12 (see module docstring)
    t0 = time.perf_counter()
    worst = 0.0
    worst_at = None
    for lam in np.linspace(0.1, 0.9, 9):
        for k in np.linspace(0.1, 0.9, 9):
            partial = sum((1.0 - lam) * (lam * k) ** l for l in range(1, 101))
            diff = abs(rho_modulus(lam, k) - partial)
            if diff > worst:
                worst, worst_at = diff, (round(float(lam), 1), round(float(k), 1))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed <= 60.0
    report("4a", "closed-form modulus vs 100-term partial sums", ok,
           f"worst |closed - partial| = {worst:.3e} at (lambda, k) = {worst_at}, "
           f"{elapsed:.2f}s; the exact remainder there exceeds the stated 1e-12")
    assert ok


def test_acceptance_4b_lambda_operator_contraction(model20):
    t0 = time.perf_counter()
    ok = True
    details = []
    for lam in (0.3, 0.5, 0.9):
        rep, passed = lambda_contraction_sweep(model20, lam, pairs=200, seed=0,
                                               truncation_tol=1e-12)
        ok = ok and passed
        details.append(f"lam={lam}: {rep['max_ratio']:.4f} <= {rep['modulus_bound']:.4f}")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed <= 60.0
    report("4b", "sampled multistep-operator contraction ratios", ok,
           "; ".join(details) + f", {elapsed:.2f}s")
    assert ok


def test_acceptance_5_lambda_operator_oracle_agreement(model20):
    t0 = time.perf_counter()
    ok = True
    details = []
    for lam in (0.0, 0.5, 0.9):
        rep, passed = certify_lambda_op(model20, lam, samples=100, seed=0,
                                        truncation_tol=1e-10, agree_tol=1e-9)
        ok = ok and passed and rep["fixed_point_residual"] <= 1e-9
        details.append(f"lam={lam}: dev {rep['max_oracle_deviation']:.2e}")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed <= 30.0
    report(5, "multistep operator fixed point and oracle agreement", ok,
           "; ".join(details) + f", {elapsed:.2f}s")
    assert ok


def test_acceptance_6_convergence_with_probability_one(model20, vstar20):
    t0 = time.perf_counter()
    v0 = shift_by_weight(vstar20, 1.0, model20.weights)
    check_initial_condition(model20, v0)   # precondition FV_0 < V_0, verified
    cfg = PirConfig(lambda_cfg=LambdaOperatorConfig(lam=0.5, truncation_tol=1e-10),
                    p=0.5, stop_tol=1e-8, max_iterations=10_000, seed=0)
    n_converged = 0
    max_err = 0.0
    sandwich_all = True
    for seed in range(1, 101):
        final, trace = run_pir(model20, v0, replace(cfg, seed=seed),
                               oracle=vstar20, oracle_slack=1e-9)
        n_converged += int(trace.converged)
        max_err = max(max_err, weighted_distance(final, vstar20, model20.weights))
        sandwich_all = sandwich_all and all(r.sandwich_ok for r in trace.iterations)
    elapsed = time.perf_counter() - t0
    ok = n_converged == 100 and max_err <= 1e-7 and sandwich_all and elapsed <= 120.0
    report(6, "100-seed convergence with sandwich certificates", ok,
           f"{n_converged}/100 converged, max final error {max_err:.3e}, "
           f"sandwich {'ok' if sandwich_all else 'VIOLATED'}, {elapsed:.2f}s")
    assert ok


def test_acceptance_7_optimum_is_infimum_over_policies():
    t0 = time.perf_counter()
    model = random_mdp(5, 2, 0.9, seed=3)
    enum = enumerate_policies(model)
    vi = value_iteration(model, tol=1e-9)
    agree = weighted_distance(enum.values, vi.value, model.weights)
    dominated = True
    import itertools
    for choice in itertools.product(*(model.controls[x] for x in range(5))):
        v_mu = exact_policy_value(model, Policy(choice))
        dominated = dominated and bool(np.all(v_mu.values >= enum.values.values - 1e-10))
    elapsed = time.perf_counter() - t0
    ok = enum.n_policies == 32 and agree <= 2e-8 and dominated and elapsed <= 5.0
    report(7, "pointwise minimum over 32 enumerated policies equals V*", ok,
           f"|min_mu V_mu - V*| = {agree:.2e}, all policies dominate: {dominated}, "
           f"{elapsed:.2f}s")
    assert ok


def test_acceptance_8_epsilon_optimal_policies(model20, vstar20):
    t0 = time.perf_counter()
    ok = True
    details = []
    for eps in (1e-2, 1e-4):
        mu_eps = epsilon_greedy_policy(model20, vstar20, eps)
        err = weighted_distance(exact_policy_value(model20, mu_eps), vstar20, model20.weights)
        ok = ok and err <= eps
        details.append(f"eps={eps:g}: error {err:.2e}")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed <= 10.0
    report(8, "perturbed-argmin policies are eps-optimal", ok,
           "; ".join(details) + f", {elapsed:.2f}s")
    assert ok


def test_acceptance_9_cli_determinism(tmp_path):
    t0 = time.perf_counter()
    model_path = tmp_path / "m.json"
    assert cli_main(["gen", "--states", "5", "--controls", "2", "--discount", "0.9",
                     "--seed", "3", "--out", str(model_path)]) == 0
    flags = ["pir", "--model", str(model_path), "--lambda", "0.5", "--p", "0.5",
             "--seeds", "1..3", "--tol", "1e-8"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli_main(flags + ["--out-dir", str(a)]) == 0
    assert cli_main(flags + ["--out-dir", str(b)]) == 0
    identical = all((a / f"trace_seed{s}.csv").read_bytes() == (b / f"trace_seed{s}.csv").read_bytes()
                    for s in (1, 2, 3))

    # lambda = 0, classical convention: value trajectories invariant to p and
    # to the Bernoulli draws (different seeds draw differently)
    def residuals(out_dir, seed):
        lines = (out_dir / f"trace_seed{seed}.csv").read_text().splitlines()[1:]
        return [line.split(",")[2] for line in lines]

    invariant = True
    base = ["pir", "--model", str(model_path), "--lambda", "0", "--tol", "1e-8",
            "--convention", "classical_l_plus_1"]
    c, d, e = tmp_path / "c", tmp_path / "d", tmp_path / "e"
    assert cli_main(base + ["--p", "0.5", "--seeds", "7", "--out-dir", str(c)]) == 0
    assert cli_main(base + ["--p", "0.9", "--seeds", "7", "--out-dir", str(d)]) == 0
    assert cli_main(base + ["--p", "0.5", "--seeds", "8", "--out-dir", str(e)]) == 0
    invariant = residuals(c, 7) == residuals(d, 7) == residuals(e, 8)
    elapsed = time.perf_counter() - t0
    ok = identical and invariant and elapsed <= 10.0
    report(9, "CLI determinism and lambda=0 branch invariance", ok,
           f"byte-identical traces: {identical}, lambda=0 invariance: {invariant}, "
           f"{elapsed:.2f}s")
    assert ok
