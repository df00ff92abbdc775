"""Certification sweeps: each returns a JSON-ready report and a pass flag.

These wire the contraction lab, the operator layer, and the oracles together
into the checks the CLI exposes.  A failing sweep embeds its counterexample
in the report.
"""

from __future__ import annotations

import numpy as np

from .bellman_ops import (LambdaOperatorConfig, apply_lambda_operator,
                          apply_optimality_batch, apply_optimality_operator,
                          apply_policy_batch, gamma_bound_constant,
                          lambda_operator, lambda_operator_modulus,
                          optimality_operator, policy_operator)
from .contraction_lab import (BANACH, CIRIC_HALFSUM, CIRIC_QUASI,
                              ScalarPairSampler, ValuePairSampler,
                              VectorOperator, check_contraction, example1_map,
                              iterate_to_fixed_point)
from .dp_model import FiniteMdp, Policy
from .oracle_solvers import (exact_policy_value, lambda_operator_oracle,
                             value_iteration)
from .value_space import ValueFunction, weighted_distance

RATIO_SLACK = 1e-12


def _report(rep) -> dict:
    return {
        "contraction_class": rep.contraction_class,
        "modulus": rep.modulus,
        "pairs_checked": rep.pairs_checked,
        "pairs_skipped": rep.pairs_skipped,
        "max_ratio": rep.max_ratio,
        "worst_pair": list(rep.worst_pair),
        "violations": rep.violations,
    }


def certify_example1(pairs: int = 120_000, seed: int = 0) -> tuple:
    """The discontinuous interval map: quasi form must hold at 1/4, the
    Banach form must fail even at modulus 0.999, and every grid start must
    iterate to the fixed point 0."""
    target = example1_map()
    sampler = ScalarPairSampler(count=pairs, seed=seed)
    quasi = check_contraction(target, CIRIC_QUASI, 0.25, sampler)
    halfsum = check_contraction(target, CIRIC_HALFSUM, 0.25, sampler)
    banach = check_contraction(target, BANACH, 0.999, sampler)
    starts = np.linspace(target.lo, target.hi, 64)
    fp_worst = 0.0
    fp_max_iters = 0
    fp_all_converged = True
    for x0 in starts:
        res = iterate_to_fixed_point(target, float(x0), tol=1e-13, max_iters=200)
        fp_all_converged &= res.converged
        fp_worst = max(fp_worst, abs(res.x_star))
        fp_max_iters = max(fp_max_iters, res.iterations)
    fixed_point_ok = fp_all_converged and fp_worst <= 1e-12
    passed = quasi.violations == 0 and banach.violations >= 1 and fixed_point_ok
    report = {
        "target": "example1",
        "quasi": _report(quasi),
        "halfsum": _report(halfsum),
        "banach": _report(banach),
        "fixed_point": {
            "starts": len(starts),
            "max_abs_limit": fp_worst,
            "max_iterations": fp_max_iters,
            "all_converged": bool(fp_all_converged),
        },
        "passed": passed,
    }
    return report, passed


def certify_mdp_ciric(model: FiniteMdp, pairs: int = 10_000, seed: int = 0,
                      modulus: float | None = None) -> tuple:
    """Weak-contraction certificate for both operators of a model."""
    if modulus is None:
        modulus = model.contraction_modulus
    sampler = ValuePairSampler(count=pairs, seed=seed)
    f_op = optimality_operator(model)
    f_target = VectorOperator(f_op, model.weights, model.n_states, batch=f_op.batch, name="optimality")
    _, mu = apply_optimality_operator(model, ValueFunction.zeros(model.n_states))
    fmu_op = policy_operator(model, mu)
    fmu_target = VectorOperator(fmu_op, model.weights, model.n_states, batch=fmu_op.batch, name="policy")
    rep_f = check_contraction(f_target, CIRIC_HALFSUM, modulus, sampler)
    rep_fmu = check_contraction(fmu_target, CIRIC_HALFSUM, modulus, sampler)
    passed = (rep_f.max_ratio <= modulus + RATIO_SLACK and rep_f.violations == 0
              and rep_fmu.max_ratio <= modulus + RATIO_SLACK and rep_fmu.violations == 0)
    report = {
        "target": "mdp-ciric",
        "modulus": modulus,
        "optimality": _report(rep_f),
        "policy": {**_report(rep_fmu), "mu": list(mu.choice)},
        "passed": passed,
    }
    return report, passed


def _random_policies(model: FiniteMdp, count: int, rng) -> list:
    out = []
    for _ in range(count):
        out.append(Policy(tuple(int(rng.choice(model.controls[x])) for x in range(model.n_states))))
    return out


def certify_bounds(model: FiniteMdp, samples: int = 1000, seed: int = 0,
                   n_policies: int = 10, per_policy: int = 100,
                   oracle_tol: float = 1e-10) -> tuple:
    """Residual-to-error certificates against the oracles, zero violations
    required: ||V*-V|| <= gamma ||FV-V|| and ||V_mu-V|| <= gamma ||F_mu V-V||."""
    nu = model.weights.weights
    gamma = gamma_bound_constant(model.contraction_modulus)
    v_star = value_iteration(model, tol=oracle_tol).value
    rng = np.random.default_rng(seed)
    batch = rng.uniform(-5.0, 5.0, size=(samples, model.n_states))
    fv = apply_optimality_batch(model, batch)
    residuals = np.max(np.abs(fv - batch) / nu, axis=1)
    errors = np.max(np.abs(batch - v_star.values) / nu, axis=1)
    opt_gap = gamma * residuals - errors
    opt_violations = int(np.count_nonzero(opt_gap < 0.0))
    worst_opt = int(np.argmin(opt_gap))

    pol_violations = 0
    min_pol_gap = np.inf
    for mu in _random_policies(model, n_policies, rng):
        v_mu = exact_policy_value(model, mu)
        pbatch = rng.uniform(-5.0, 5.0, size=(per_policy, model.n_states))
        fmu = apply_policy_batch(model, mu, pbatch)
        res = np.max(np.abs(fmu - pbatch) / nu, axis=1)
        err = np.max(np.abs(pbatch - v_mu.values) / nu, axis=1)
        gap = gamma * res - err
        pol_violations += int(np.count_nonzero(gap < 0.0))
        min_pol_gap = min(min_pol_gap, float(gap.min()))

    passed = opt_violations == 0 and pol_violations == 0
    report = {
        "target": "bounds",
        "gamma": gamma,
        "samples": samples,
        "optimality_violations": opt_violations,
        "optimality_min_slack": float(opt_gap.min()),
        "optimality_worst_v": batch[worst_opt].tolist(),
        "policies": n_policies,
        "per_policy_samples": per_policy,
        "policy_violations": pol_violations,
        "policy_min_slack": min_pol_gap,
        "passed": passed,
    }
    return report, passed


def certify_lambda_op(model: FiniteMdp, lam: float, samples: int = 100, seed: int = 0,
                      truncation_tol: float = 1e-10, agree_tol: float = 1e-9) -> tuple:
    """Truncated multistep operator against the linear-solve oracle, plus the
    fixed-point identity at the policy's value."""
    cfg = LambdaOperatorConfig(lam=lam, truncation_tol=truncation_tol)
    _, mu = apply_optimality_operator(model, ValueFunction.zeros(model.n_states))
    v_mu = exact_policy_value(model, mu)
    fp_res = weighted_distance(apply_lambda_operator(model, mu, v_mu, cfg).value, v_mu, model.weights)
    rng = np.random.default_rng(seed)
    max_dev = 0.0
    max_terms_used = 0
    for _ in range(samples):
        v = ValueFunction(rng.uniform(-5.0, 5.0, model.n_states))
        res = apply_lambda_operator(model, mu, v, cfg)
        oracle = lambda_operator_oracle(model, mu, v, lam)
        max_dev = max(max_dev, weighted_distance(res.value, oracle, model.weights))
        max_terms_used = max(max_terms_used, res.terms)
    passed = fp_res <= 1e-9 and max_dev <= agree_tol
    report = {
        "target": "lambda-op",
        "lambda": lam,
        "truncation_tol": truncation_tol,
        "samples": samples,
        "fixed_point_residual": fp_res,
        "max_oracle_deviation": max_dev,
        "max_terms_used": max_terms_used,
        "mu": list(mu.choice),
        "passed": passed,
    }
    return report, passed


def lambda_contraction_sweep(model: FiniteMdp, lam: float, pairs: int = 200, seed: int = 0,
                             truncation_tol: float = 1e-12) -> tuple:
    """Sampled contraction ratios of the truncated multistep operator against
    its closed-form modulus k(1-lam)/(1-lam k)."""
    cfg = LambdaOperatorConfig(lam=lam, truncation_tol=truncation_tol)
    _, mu = apply_optimality_operator(model, ValueFunction.zeros(model.n_states))
    op = lambda_operator(model, mu, cfg)
    target = VectorOperator(op, model.weights, model.n_states, name=f"lambda_{lam}")
    sampler = ValuePairSampler(count=pairs, seed=seed)
    bound = lambda_operator_modulus(lam, model.contraction_modulus)
    rep = check_contraction(target, CIRIC_HALFSUM, min(bound + 1e-9, 1.0 - 1e-15), sampler)
    passed = rep.max_ratio <= bound + 1e-9
    report = {
        "target": "lambda-contraction",
        "lambda": lam,
        "modulus_bound": bound,
        **_report(rep),
        "passed": passed,
    }
    return report, passed
