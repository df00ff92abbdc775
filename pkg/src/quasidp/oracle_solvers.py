"""Ground-truth solvers: boring, direct, and independently checkable.

These back every certification and acceptance suite, so they favor obviously
correct dense linear algebra over speed.  Policy evaluation and the exact
lambda-operator both reduce to small linear solves; optimal values come from
plain value iteration or exhaustive policy enumeration.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from .bellman_ops import apply_optimality_operator, apply_policy_operator
from .dp_model import FiniteMdp, Policy
from .errors import (DimensionError, DomainError, EnumerationCapError,
                     QuasidpError)
from .value_space import ValueFunction, weighted_distance

FIXED_POINT_RESIDUAL_TOL = 1e-10


def _policy_matrices(model: FiniteMdp, mu: Policy):
    rows = model.policy_rows(mu)
    return model.pair_g[rows], model.pair_P[rows]


def exact_policy_value(model: FiniteMdp, mu: Policy) -> ValueFunction:
    """The policy's value: the unique solution of V = g_mu + alpha P_mu V."""
    g, P = _policy_matrices(model, mu)
    n = model.n_states
    v = ValueFunction(np.linalg.solve(np.eye(n) - model.discount * P, g))
    residual = weighted_distance(apply_policy_operator(model, mu, v), v, model.weights)
    if residual > FIXED_POINT_RESIDUAL_TOL:
        # cannot happen for alpha < 1 with a row-stochastic P
        raise QuasidpError(f"policy evaluation residual {residual} exceeds {FIXED_POINT_RESIDUAL_TOL}")
    return v


@dataclass(frozen=True)
class ValueIterationResult:
    value: ValueFunction
    iterations: int
    last_diff: float
    converged: bool


def value_iteration(model: FiniteMdp, v0: ValueFunction | None = None, tol: float = 1e-8,
                    max_iters: int = 1_000_000) -> ValueIterationResult:
    """Iterate the optimality operator to within tol of the optimal value.

    Stops when successive iterates differ by at most tol*(1-alpha)/alpha in
    weighted norm, which bounds the final fixed-point error by tol.
    """
    if tol <= 0.0:
        raise DomainError("tol must be positive")
    if v0 is None:
        v0 = ValueFunction.zeros(model.n_states)
    k = model.contraction_modulus
    if not k < 1.0:
        raise DomainError(
            f"weighted-norm modulus {k} >= 1: no error-calibrated stopping is available")
    thresh = tol * (1.0 - k) / k
    arr, iters, diff = kernels.value_iterate(
        model.pair_g, model.pair_P, model.offsets, model.discount,
        model.weights.weights, v0.values, thresh, max_iters)
    return ValueIterationResult(ValueFunction(arr), int(iters), float(diff), diff <= thresh)


@dataclass(frozen=True)
class PolicyIterationResult:
    value: ValueFunction
    policy: Policy
    iterations: int
    converged: bool


def policy_iteration(model: FiniteMdp, max_iters: int = 10_000) -> PolicyIterationResult:
    """Exact policy iteration: evaluate by linear solve, improve greedily."""
    _, mu = apply_optimality_operator(model, ValueFunction.zeros(model.n_states))
    for it in range(1, max_iters + 1):
        v = exact_policy_value(model, mu)
        _, improved = apply_optimality_operator(model, v)
        if improved.choice == mu.choice:
            return PolicyIterationResult(v, mu, it, True)
        mu = improved
    return PolicyIterationResult(exact_policy_value(model, mu), mu, max_iters, False)


@dataclass(frozen=True)
class EnumerationResult:
    values: ValueFunction      # pointwise minimum over all deterministic policies
    policy: Policy             # a policy attaining the minimum at every state
    n_policies: int


def enumerate_policies(model: FiniteMdp, cap: int = 1_000_000) -> EnumerationResult:
    """Evaluate every deterministic policy and take the pointwise minimum.

    Refuses (with the count) when the policy space exceeds the cap.  A policy
    attaining the minimum simultaneously at every state exists for finite
    discounted models; its absence would indicate a solver bug.
    """
    count = _policy_count(model)
    if count > cap:
        raise EnumerationCapError(count, cap)
    lowest = np.full(model.n_states, np.inf)
    for choice in itertools.product(*(model.controls[x] for x in range(model.n_states))):
        lowest = np.minimum(lowest, exact_policy_value(model, Policy(choice)).values)
    best = None
    for choice in itertools.product(*(model.controls[x] for x in range(model.n_states))):
        v = exact_policy_value(model, Policy(choice))
        if np.max(v.values - lowest) <= 1e-9:
            best = Policy(choice)
            break
    if best is None:
        raise QuasidpError("no single policy attains the pointwise minimum (solver bug)")
    return EnumerationResult(ValueFunction(lowest), best, count)


def _policy_count(model: FiniteMdp) -> int:
    count = 1
    for x in range(model.n_states):
        count *= len(model.controls[x])
    return count


def lambda_operator_oracle(model: FiniteMdp, mu: Policy, v: ValueFunction, lam: float) -> ValueFunction:
    """Exact lambda operator (classical convention) by linear solve.

    For the affine policy operator F_mu w = g + A w with A = alpha P_mu, the
    infinite series solves (I - lam A) W = (1-lam) A v + g.  The result is
    checked against the defining recursion W = F_mu((1-lam) v + lam W).
    """
    if not 0.0 <= lam < 1.0:
        raise DomainError(f"lambda must lie in [0, 1), got {lam!r}")
    if len(v) != model.n_states:
        raise DimensionError(f"value function length {len(v)} != n_states {model.n_states}")
    g, P = _policy_matrices(model, mu)
    A = model.discount * P
    n = model.n_states
    w = np.linalg.solve(np.eye(n) - lam * A, (1.0 - lam) * (A @ v.values) + g)
    result = ValueFunction(w)
    mixed = ValueFunction((1.0 - lam) * v.values + lam * w)
    residual = weighted_distance(apply_policy_operator(model, mu, mixed), result, model.weights)
    if residual > FIXED_POINT_RESIDUAL_TOL:
        raise QuasidpError(f"lambda-operator solve residual {residual} exceeds {FIXED_POINT_RESIDUAL_TOL}")
    return result
