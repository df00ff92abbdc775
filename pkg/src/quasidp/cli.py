"""Batch command-line entry point.

Subcommands: ``gen`` (write a reproducible random model), ``solve`` (optimal
values by value iteration, exact policy iteration, or policy enumeration),
``pir`` (randomized multistep policy iteration runs with trace files), and
``certify`` (contraction and bound certification sweeps).

All reports are UTF-8 JSON with a top-level "schema_version": 1; traces are
CSV.  Exit codes: 0 success, 2 input/validation, 3 nonconvergence,
4 precondition violation, 5 certification failure.  Every command is a
deterministic function of its full flag set; measured wall times appear only
in reports, never in trace CSVs (unless ``--timings`` is passed).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

from . import certify as certify_mod
from .bellman_ops import (CLASSICAL_L_PLUS_1, PAPER_L, LambdaOperatorConfig,
                          apply_optimality_operator)
from .dp_model import load_model, random_mdp, save_model
from .errors import PreconditionError, QuasidpError, ValidationError
from .lambda_pir import ConstantP, GeometricP, PirConfig, run_pir
from .oracle_solvers import (enumerate_policies, policy_iteration,
                             value_iteration)
from .value_space import shift_by_weight, weighted_distance

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NONCONVERGED = 3
EXIT_PRECONDITION = 4
EXIT_CERTIFY_FAIL = 5


def _parse_seeds(spec: str) -> list:
    """Seed list syntax: "7", "1,2,9", or inclusive "1..100"."""
    spec = spec.strip()
    if ".." in spec:
        a, b = spec.split("..", 1)
        lo, hi = int(a), int(b)
        if hi < lo:
            raise ValueError(f"empty seed range {spec!r}")
        return list(range(lo, hi + 1))
    return [int(s) for s in spec.split(",")]


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=1)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def cmd_gen(args) -> int:
    model = random_mdp(args.states, args.controls, args.discount, args.seed)
    save_model(model, args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    model = load_model(args.model)
    t0 = time.perf_counter()
    converged = True
    policy = None
    if args.method == "vi":
        res = value_iteration(model, tol=args.tol, max_iters=args.max_iters)
        v_star, iterations, converged = res.value, res.iterations, res.converged
    elif args.method == "pi_exact":
        res = policy_iteration(model)
        v_star, iterations, converged, policy = res.value, res.iterations, res.converged, res.policy
    else:
        res = enumerate_policies(model, cap=args.cap)
        v_star, iterations, policy = res.values, res.n_policies, res.policy
    wall = time.perf_counter() - t0
    fv, _ = apply_optimality_operator(model, v_star)
    report = {
        "schema_version": 1,
        "method": args.method,
        "v_star": [float(x) for x in v_star.values],
        "residual": weighted_distance(fv, v_star, model.weights),
        "iterations": iterations,
        "wall_time_s": wall,
        "converged": converged,
    }
    if policy is not None:
        report["policy"] = list(policy.choice)
    _emit(report, args.out)
    return EXIT_OK if converged else EXIT_NONCONVERGED


def cmd_pir(args) -> int:
    model = load_model(args.model)
    seeds = _parse_seeds(args.seeds)
    if args.p_beta is not None:
        schedule = GeometricP(args.p, args.p_beta, args.p_min)
    else:
        schedule = ConstantP(args.p)
    cfg = PirConfig(
        lambda_cfg=LambdaOperatorConfig(
            lam=getattr(args, "lambda"), truncation_tol=args.truncation_tol,
            max_terms=args.max_terms, exponent_convention=args.convention),
        p=schedule, stop_tol=args.tol, max_iterations=args.max_iters,
        enforce_initial_condition=not args.no_enforce)
    oracle = value_iteration(model, tol=args.oracle_tol).value
    v0 = shift_by_weight(oracle, args.v0_shift, model.weights)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    per_seed = []
    n_converged = 0
    max_err = 0.0
    for seed in seeds:
        final, trace = run_pir(model, v0, replace(cfg, seed=seed), oracle=oracle)
        trace.to_csv(out_dir / f"trace_seed{seed}.csv", include_timings=args.timings)
        err = weighted_distance(final, oracle, model.weights)
        max_err = max(max_err, err)
        n_converged += int(trace.converged)
        entry = trace.metadata(replace(cfg, seed=seed))
        entry["error_vs_oracle"] = err
        per_seed.append(entry)
    summary = {
        "schema_version": 1,
        "model": str(args.model),
        "seeds": seeds,
        "converged": n_converged,
        "max_error_vs_oracle": max_err,
        "oracle_tol": args.oracle_tol,
        "v0_shift": args.v0_shift,
        "runs": per_seed,
    }
    (out_dir / "summary.json").write_text(json.dumps(summary, indent=1) + "\n", encoding="utf-8")
    return EXIT_OK if n_converged == len(seeds) else EXIT_NONCONVERGED


def cmd_certify(args) -> int:
    if args.target != "example1" and args.model is None:
        raise ValidationError(f"--model is required for target {args.target!r}")
    if args.target == "example1":
        pairs = args.pairs if args.pairs is not None else 120_000
        report, passed = certify_mod.certify_example1(pairs=pairs, seed=args.seed)
    elif args.target == "mdp-ciric":
        model = load_model(args.model)
        pairs = args.pairs if args.pairs is not None else 10_000
        report, passed = certify_mod.certify_mdp_ciric(
            model, pairs=pairs, seed=args.seed, modulus=args.modulus)
    elif args.target == "bounds":
        model = load_model(args.model)
        report, passed = certify_mod.certify_bounds(model, samples=args.samples, seed=args.seed)
    else:
        model = load_model(args.model)
        report, passed = certify_mod.certify_lambda_op(
            model, lam=getattr(args, "lambda"), samples=args.samples, seed=args.seed,
            truncation_tol=args.truncation_tol)
    report = {"schema_version": 1, **report}
    _emit(report, args.out)
    return EXIT_OK if passed else EXIT_CERTIFY_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quasidp",
        description="Dynamic programming under weak contractions: solvers, "
                    "randomized multistep policy iteration, certification sweeps.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="write a reproducible random model file")
    gen.add_argument("--states", type=int, required=True)
    gen.add_argument("--controls", type=int, required=True)
    gen.add_argument("--discount", type=float, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_gen)

    solve = sub.add_parser("solve", help="compute optimal values")
    solve.add_argument("--model", required=True)
    solve.add_argument("--method", choices=("vi", "pi_exact", "enumerate"), default="vi")
    solve.add_argument("--tol", type=float, default=1e-8, help="value-iteration error tolerance")
    solve.add_argument("--max-iters", type=int, default=1_000_000)
    solve.add_argument("--cap", type=int, default=1_000_000, help="policy enumeration cap")
    solve.add_argument("--out", default=None, help="report path (stdout when omitted)")
    solve.set_defaults(func=cmd_solve)

    pir = sub.add_parser("pir", help="randomized multistep policy iteration runs")
    pir.add_argument("--model", required=True)
    pir.add_argument("--lambda", type=float, default=0.5)
    pir.add_argument("--p", type=float, default=0.5, help="policy-branch probability")
    pir.add_argument("--p-beta", type=float, default=None, help="geometric decay of p_k (constant p when omitted)")
    pir.add_argument("--p-min", type=float, default=1e-3)
    pir.add_argument("--seeds", default="0", help='"7", "1,2,9", or inclusive "1..100"')
    pir.add_argument("--tol", type=float, default=1e-8, help="stop when the optimality residual reaches this")
    pir.add_argument("--max-iters", type=int, default=10_000)
    pir.add_argument("--v0-shift", type=float, default=1.0,
                     help="V_0 = oracle estimate + shift * weights (keeps F V_0 < V_0 for shift > 0)")
    pir.add_argument("--convention", choices=(PAPER_L, CLASSICAL_L_PLUS_1), default=CLASSICAL_L_PLUS_1)
    pir.add_argument("--truncation-tol", type=float, default=1e-10)
    pir.add_argument("--max-terms", type=int, default=10_000)
    pir.add_argument("--oracle-tol", type=float, default=1e-10)
    pir.add_argument("--no-enforce", action="store_true", help="skip the F V_0 < V_0 precondition check")
    pir.add_argument("--timings", action="store_true", help="write measured wall times into trace CSVs "
                     "(off by default so identical runs produce identical bytes)")
    pir.add_argument("--out-dir", default="pir_out")
    pir.set_defaults(func=cmd_pir)

    cert = sub.add_parser("certify", help="run a certification sweep")
    cert.add_argument("target", choices=("mdp-ciric", "example1", "lambda-op", "bounds"))
    cert.add_argument("--model", default=None)
    cert.add_argument("--pairs", type=int, default=None,
                      help="pair count (default 120000 for example1, 10000 otherwise)")
    cert.add_argument("--samples", type=int, default=1000)
    cert.add_argument("--seed", type=int, default=0)
    cert.add_argument("--lambda", type=float, default=0.5)
    cert.add_argument("--modulus", type=float, default=None)
    cert.add_argument("--truncation-tol", type=float, default=1e-10)
    cert.add_argument("--out", default=None)
    cert.set_defaults(func=cmd_certify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (QuasidpError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
