"""Policy and optimality operators, the multistep lambda operator, and the
residual-to-error certificates.

For a model with one-step mapping H,

    policy operator      (F_mu v)(x) = H(x, mu(x), v)
    optimality operator  (F v)(x)    = min_u H(x, u, v)

The lambda operator is the geometrically weighted series of policy-operator
powers, sum_l (1-lam) lam^l F_mu^{e(l)} v, truncated with a certified tail
bound and renormalized so the weights form an exact convex combination.  Two
exponent conventions are supported: ``paper_l`` starts the series at the
identity (e(l) = l), ``classical_l_plus_1`` starts at F_mu (e(l) = l+1).  The
default is classical: it makes the operator a strict contraction for every
lam in [0, 1), and at lam = 0 it reduces the randomized iteration to plain
policy iteration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels as kernels
from .dp_model import DpModel, FiniteMdp, Policy
from .errors import DimensionError, DomainError
from .value_space import ValueFunction, WeightFunction, weighted_distance

PAPER_L = "paper_l"
CLASSICAL_L_PLUS_1 = "classical_l_plus_1"


@dataclass(frozen=True)
class LambdaOperatorConfig:
    """Series weight lam, truncation tolerance, term cap, exponent convention."""

    lam: float = 0.5
    truncation_tol: float = 1e-10
    max_terms: int = 10_000
    exponent_convention: str = CLASSICAL_L_PLUS_1

    def __post_init__(self):
        if not 0.0 <= self.lam < 1.0:
            raise DomainError(f"lambda must lie in [0, 1), got {self.lam!r}")
        if not self.truncation_tol > 0.0:
            raise DomainError("truncation_tol must be positive")
        if self.max_terms < 1:
            raise DomainError("max_terms must be at least 1")
        if self.exponent_convention not in (PAPER_L, CLASSICAL_L_PLUS_1):
            raise DomainError(f"unknown exponent convention {self.exponent_convention!r}")


@dataclass(frozen=True)
class LambdaResult:
    """Truncated lambda-operator application.

    ``tail_bound`` is a certified upper bound on the weighted-norm deviation
    from the exact infinite series; ``hit_cap`` marks runs that stopped at
    ``max_terms`` before reaching the tolerance (a warning, not a failure).
    """

    value: ValueFunction
    terms: int
    tail_bound: float
    hit_cap: bool


def _check_value(model: DpModel, v: ValueFunction):
    if len(v) != model.n_states:
        raise DimensionError(f"value function length {len(v)} != n_states {model.n_states}")


def apply_policy_operator(model: FiniteMdp, mu: Policy, v: ValueFunction) -> ValueFunction:
    """F_mu v: one-step values of following mu against continuation v."""
    _check_value(model, v)
    rows = model.policy_rows(mu)
    return ValueFunction(kernels.policy_apply(model.pair_g, model.pair_P, model.discount, v.values, rows))


def apply_optimality_operator(model: FiniteMdp, v: ValueFunction) -> tuple:
    """F v together with a greedy policy attaining it.

    The returned policy realizes F exactly: applying the policy operator with
    it reproduces the returned values bit for bit.  Ties break to the lowest
    control id.
    """
    _check_value(model, v)
    values, argpos = kernels.optimality_apply(
        model.pair_g, model.pair_P, model.offsets, model.discount, v.values)
    return ValueFunction(values), model.policy_of_argpos(argpos)


def apply_optimality_batch(model: FiniteMdp, batch: np.ndarray) -> np.ndarray:
    """F applied to a (count, n_states) batch of value arrays at once."""
    h = model.pair_g[:, None] + model.discount * (model.pair_P @ batch.T)
    rows, mask = model.pad_tables()
    return np.min(h[rows] + mask[:, :, None], axis=1).T


def apply_policy_batch(model: FiniteMdp, mu: Policy, batch: np.ndarray) -> np.ndarray:
    """F_mu applied to a (count, n_states) batch of value arrays at once."""
    rows = model.policy_rows(mu)
    h = model.pair_g[rows, None] + model.discount * (model.pair_P[rows] @ batch.T)
    return h.T


def apply_power(model: FiniteMdp, mu: Policy, v: ValueFunction, l: int) -> ValueFunction:
    """l-fold composition of the policy operator; l = 0 returns v unchanged."""
    if l < 0:
        raise DomainError("power must be nonnegative")
    _check_value(model, v)
    rows = model.policy_rows(mu)
    return ValueFunction(kernels.policy_power(model.pair_g, model.pair_P, model.discount, v.values, rows, l))


def apply_lambda_operator(model: FiniteMdp, mu: Policy, v: ValueFunction,
                          cfg: LambdaOperatorConfig) -> LambdaResult:
    """Truncated, renormalized lambda operator (see module docstring).

    At lam = 0 the series collapses to a single term and is returned exactly:
    v under ``paper_l``, F_mu v under ``classical_l_plus_1``.
    """
    _check_value(model, v)
    if cfg.lam == 0.0:
        if cfg.exponent_convention == PAPER_L:
            return LambdaResult(v, 1, 0.0, False)
        return LambdaResult(apply_policy_operator(model, mu, v), 1, 0.0, False)
    if not model.contraction_modulus < 1.0:
        raise DomainError(
            f"weighted-norm modulus {model.contraction_modulus} >= 1: "
            "the series tail cannot be certified")
    rows = model.policy_rows(mu)
    arr, terms, tail, hit_cap = kernels.policy_series(
        model.pair_g, model.pair_P, model.discount, rows,
        model.contraction_modulus, model.weights.weights, v.values,
        cfg.lam, cfg.exponent_convention == CLASSICAL_L_PLUS_1,
        cfg.truncation_tol, cfg.max_terms)
    return LambdaResult(ValueFunction(arr), int(terms), float(tail), bool(hit_cap))


# -- operator handles (callables ValueFunction -> ValueFunction) -------------

def optimality_operator(model: FiniteMdp) -> Callable:
    def op(v: ValueFunction) -> ValueFunction:
        return apply_optimality_operator(model, v)[0]
    op.batch = lambda batch: apply_optimality_batch(model, batch)
    return op


def policy_operator(model: FiniteMdp, mu: Policy) -> Callable:
    def op(v: ValueFunction) -> ValueFunction:
        return apply_policy_operator(model, mu, v)
    op.batch = lambda batch: apply_policy_batch(model, mu, batch)
    return op


def lambda_operator(model: FiniteMdp, mu: Policy, cfg: LambdaOperatorConfig) -> Callable:
    def op(v: ValueFunction) -> ValueFunction:
        return apply_lambda_operator(model, mu, v, cfg).value
    return op


# -- comparison quantities and bound constants --------------------------------

@dataclass(frozen=True)
class CiricComparison:
    """The distances entering the weak-contraction inequality for one pair.

    ``left`` is d(Fv, Fv'); the four candidates are d(v, v'), the two
    self-residuals d(v, Fv) and d(v', Fv'), and the half-sum of the cross
    distances (d(v, Fv') + d(v', Fv)) / 2.
    """

    left: float
    d_pair: float
    d_self_v: float
    d_self_vp: float
    half_cross: float

    @property
    def candidates(self) -> tuple:
        return (self.d_pair, self.d_self_v, self.d_self_vp, self.half_cross)

    @property
    def max_candidate(self) -> float:
        return max(self.candidates)

    @property
    def ratio(self):
        """left / max(candidates), or None when every candidate is zero."""
        m = self.max_candidate
        if m == 0.0:
            return None
        return self.left / m


def ciric_comparison(op: Callable, v: ValueFunction, v_prime: ValueFunction,
                     nu: WeightFunction) -> CiricComparison:
    """Evaluate the five weak-contraction quantities for one pair under op."""
    fv = op(v)
    fvp = op(v_prime)
    return CiricComparison(
        left=weighted_distance(fv, fvp, nu),
        d_pair=weighted_distance(v, v_prime, nu),
        d_self_v=weighted_distance(v, fv, nu),
        d_self_vp=weighted_distance(v_prime, fvp, nu),
        half_cross=0.5 * (weighted_distance(v, fvp, nu) + weighted_distance(v_prime, fv, nu)),
    )


def gamma_bound_constant(sigma: float) -> float:
    """max((2-s)/(2-2s), 1/(1-s)) for a modulus s in (0, 1).

    The second branch dominates on the whole interval; the max is kept as the
    defining form and the dominance is asserted by a unit test rather than
    simplified away.
    """
    if not 0.0 < sigma < 1.0:
        raise DomainError(f"modulus must lie strictly inside (0, 1), got {sigma!r}")
    return max((2.0 - sigma) / (2.0 - 2.0 * sigma), 1.0 / (1.0 - sigma))


def rho_modulus(lam: float, k: float) -> float:
    """Closed form of sum_{l>=1} (1-lam) lam^l k^l, i.e. (1-lam) lam k / (1 - lam k)."""
    if not 0.0 <= lam < 1.0:
        raise DomainError(f"lambda must lie in [0, 1), got {lam!r}")
    if not 0.0 < k < 1.0:
        raise DomainError(f"modulus must lie strictly inside (0, 1), got {k!r}")
    return (1.0 - lam) * lam * k / (1.0 - lam * k)


def lambda_operator_modulus(lam: float, k: float) -> float:
    """Contraction modulus of the classical-convention lambda operator,
    k (1-lam) / (1 - lam k) = sum_{l>=0} (1-lam) lam^l k^{l+1}."""
    if not 0.0 <= lam < 1.0:
        raise DomainError(f"lambda must lie in [0, 1), got {lam!r}")
    if not 0.0 < k < 1.0:
        raise DomainError(f"modulus must lie strictly inside (0, 1), got {k!r}")
    return k * (1.0 - lam) / (1.0 - lam * k)


def certified_error_bound(model: FiniteMdp, v: ValueFunction, sigma: float | None = None,
                          mu: Policy | None = None) -> float:
    """A-posteriori bound on the distance from v to the operator's fixed point.

    Returns gamma(sigma) * ||Fv - v|| (optimality operator when mu is None,
    otherwise the policy operator for mu).  sigma defaults to the model's
    known contraction modulus.
    """
    if sigma is None:
        sigma = model.contraction_modulus
    gamma = gamma_bound_constant(sigma)
    if mu is None:
        applied = apply_optimality_operator(model, v)[0]
    else:
        applied = apply_policy_operator(model, mu, v)
    return gamma * weighted_distance(applied, v, model.weights)


def epsilon_greedy_policy(model: FiniteMdp, v_star: ValueFunction, epsilon: float,
                          sigma: float | None = None) -> Policy:
    """A policy eps-optimal in weighted norm, built by perturbed argmin at v_star.

    At each state, among the controls whose one-step value is within
    eps * nu(x) / gamma(sigma) of the minimum, the worst one is chosen (the
    adversarial pick inside the certified slack), so the residual-to-error
    bound alone guarantees ||V_mu - V*|| <= eps.
    """
    if epsilon <= 0.0:
        raise DomainError("epsilon must be positive")
    if sigma is None:
        sigma = model.contraction_modulus
    slack = epsilon / gamma_bound_constant(sigma)
    _check_value(model, v_star)
    h = model.pair_g + model.discount * (model.pair_P @ v_star.values)
    choice = []
    for x in range(model.n_states):
        lo, hi = model.offsets[x], model.offsets[x + 1]
        seg = h[lo:hi]
        admissible = seg <= seg.min() + slack * model.weights.weights[x]
        worst = np.flatnonzero(admissible)[np.argmax(seg[admissible])]
        choice.append(int(model.pair_control[lo + worst]))
    return Policy(tuple(choice))
