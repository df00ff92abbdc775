"""Empirical certification of contraction classes for self-maps.

Three inequality classes are checked, never conflated:

    banach         d(Tx, Ty) <= q * d(x, y)
    ciric_halfsum  d(Tx, Ty) <= q * max(d(x,y), d(x,Tx), d(y,Ty),
                                        (d(x,Ty) + d(y,Tx)) / 2)
    ciric_quasi    d(Tx, Ty) <= q * max(d(x,y), d(x,Ty), d(y,Tx))

Targets are either scalar interval self-maps (metric |x - y|) or operators on
value functions (weighted sup-norm metric).  Sampling mixes a seeded uniform
sample with a stratified grid and forced pairs straddling any declared
discontinuity; pure random sampling can miss a jump entirely.  Pairs where
every candidate distance is zero are vacuous and therefore skipped, not
counted as violations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, SamplingError, ValidationError
from .value_space import ValueFunction, WeightFunction

BANACH = "banach"
CIRIC_HALFSUM = "ciric_halfsum"
CIRIC_QUASI = "ciric_quasi"
CLASSES = (BANACH, CIRIC_HALFSUM, CIRIC_QUASI)


@dataclass(frozen=True, eq=False)
class ScalarMap:
    """A self-map of a real interval, with optional known metadata.

    ``fn`` must accept scalars and numpy arrays.  Construction samples a
    coarse grid to verify the map sends [lo, hi] into itself.
    """

    fn: Callable
    lo: float
    hi: float
    known_modulus: float | None = None
    known_fixed_point: float | None = None
    discontinuities: tuple = ()
    name: str = ""

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValidationError("empty interval")
        probe = np.linspace(self.lo, self.hi, 257)
        img = np.asarray(self.fn(probe), dtype=np.float64)
        if np.any(img < self.lo) or np.any(img > self.hi):
            raise ValidationError("map does not send the interval into itself")

    def __call__(self, x):
        arr = np.asarray(x, dtype=np.float64)
        if np.any(arr < self.lo) or np.any(arr > self.hi):
            raise DomainError(f"argument outside [{self.lo}, {self.hi}]")
        out = self.fn(arr)
        return float(out) if np.isscalar(x) or arr.ndim == 0 else np.asarray(out, dtype=np.float64)


def example1_map() -> ScalarMap:
    """The piecewise linear map x/4 on [0, 1], x/5 on (1, 2].

    Discontinuous at 1 (value 0.25, right limit 0.2), so no Banach modulus
    below 1 works, yet the quasi form holds with modulus 1/4 and every orbit
    reaches the fixed point 0.
    """
    return ScalarMap(
        fn=lambda x: np.where(np.asarray(x, dtype=np.float64) <= 1.0, np.asarray(x) / 4.0, np.asarray(x) / 5.0),
        lo=0.0, hi=2.0,
        known_modulus=0.25,
        known_fixed_point=0.0,
        discontinuities=(1.0,),
        name="piecewise_quarter_fifth",
    )


@dataclass(frozen=True, eq=False)
class VectorOperator:
    """An operator on value functions, paired with the norm weights.

    ``batch``, when given, maps a (count, n_states) array through the
    operator row-wise in one call; the checker falls back to a per-pair loop
    otherwise.
    """

    fn: Callable
    nu: WeightFunction
    n_states: int
    batch: Callable | None = None
    name: str = ""


@dataclass(frozen=True)
class ScalarPairSampler:
    """Seeded pair sampler for interval maps (uniform + grid + cross pairs)."""

    count: int = 100_000
    seed: int = 0
    grid: int = 33
    deltas: tuple = (1e-3, 1e-6)

    def pairs(self, target: ScalarMap):
        rng = np.random.default_rng(self.seed)
        uni = rng.uniform(target.lo, target.hi, size=(self.count, 2))
        axis = np.linspace(target.lo, target.hi, self.grid)
        gx, gy = np.meshgrid(axis, axis)
        xs = [uni[:, 0], gx.ravel()]
        ys = [uni[:, 1], gy.ravel()]
        for a in target.discontinuities:
            for d in self.deltas:
                for x, y in ((a, a + d), (a + d, a), (a - d, a + d), (a + d, a - d)):
                    if target.lo <= x <= target.hi and target.lo <= y <= target.hi:
                        xs.append(np.array([x]))
                        ys.append(np.array([y]))
        return np.concatenate(xs), np.concatenate(ys)


@dataclass(frozen=True)
class ValuePairSampler:
    """Seeded sampler of value-function pairs with uniform entries."""

    count: int = 10_000
    seed: int = 0
    low: float = -5.0
    high: float = 5.0

    def pairs(self, n_states: int):
        rng = np.random.default_rng(self.seed)
        draw = rng.uniform(self.low, self.high, size=(self.count, 2, n_states))
        return draw[:, 0, :], draw[:, 1, :]


@dataclass
class ContractionReport:
    """Outcome of one contraction sweep; exportable as JSON."""

    contraction_class: str
    modulus: float
    pairs_checked: int
    pairs_skipped: int
    max_ratio: float
    worst_pair: tuple
    violations: int

    def to_json(self) -> str:
        d = {
            "contraction_class": self.contraction_class,
            "modulus": self.modulus,
            "pairs_checked": self.pairs_checked,
            "pairs_skipped": self.pairs_skipped,
            "max_ratio": self.max_ratio,
            "worst_pair": list(self.worst_pair),
            "violations": self.violations,
        }
        return json.dumps(d, indent=1)


def _candidates(cls: str, d_pair, d_self_x, d_self_y, d_cross_xy, d_cross_yx):
    if cls == BANACH:
        return d_pair
    if cls == CIRIC_HALFSUM:
        return np.maximum.reduce([d_pair, d_self_x, d_self_y, 0.5 * (d_cross_xy + d_cross_yx)])
    if cls == CIRIC_QUASI:
        return np.maximum.reduce([d_pair, d_cross_xy, d_cross_yx])
    raise DomainError(f"unknown contraction class {cls!r}; pick one of {CLASSES}")


def _sweep_scalar(target: ScalarMap, cls: str, sampler: ScalarPairSampler):
    xs, ys = sampler.pairs(target)
    tx, ty = target(xs), target(ys)
    lhs = np.abs(tx - ty)
    den = _candidates(cls, np.abs(xs - ys), np.abs(xs - tx), np.abs(ys - ty),
                      np.abs(xs - ty), np.abs(ys - tx))
    return lhs, den, lambda i: (float(xs[i]), float(ys[i])), xs.size


def _sweep_vector(target: VectorOperator, cls: str, sampler: ValuePairSampler):
    V, W = sampler.pairs(target.n_states)
    nu = target.nu.weights

    def rowdist(a, b):
        return np.max(np.abs(a - b) / nu, axis=1)

    if target.batch is not None:
        FV, FW = target.batch(V), target.batch(W)
    else:
        FV = np.stack([target.fn(ValueFunction(row)).values for row in V])
        FW = np.stack([target.fn(ValueFunction(row)).values for row in W])
    lhs = rowdist(FV, FW)
    den = _candidates(cls, rowdist(V, W), rowdist(V, FV), rowdist(W, FW),
                      rowdist(V, FW), rowdist(W, FV))
    return lhs, den, lambda i: (V[i].tolist(), W[i].tolist()), V.shape[0]


def check_contraction(target, contraction_class: str, modulus: float, sampler) -> ContractionReport:
    """Sweep sampled pairs and report the worst observed ratio and violations.

    ``target`` is a ScalarMap or a VectorOperator.  Deterministic under a
    fixed sampler seed.  Raises SamplingError when every sampled pair has all
    candidate distances zero.
    """
    if not 0.0 < modulus < 1.0:
        raise DomainError(f"modulus must lie strictly inside (0, 1), got {modulus!r}")
    if isinstance(target, ScalarMap):
        lhs, den, pair_at, total = _sweep_scalar(target, contraction_class, sampler)
    elif isinstance(target, VectorOperator):
        lhs, den, pair_at, total = _sweep_vector(target, contraction_class, sampler)
    else:
        raise DomainError(f"unsupported target type {type(target).__name__}")
    usable = den > 0.0
    n_usable = int(usable.sum())
    if n_usable == 0:
        raise SamplingError("every sampled pair has zero candidate distances")
    ratios = np.where(usable, lhs / np.where(usable, den, 1.0), -np.inf)
    worst = int(np.argmax(ratios))
    violations = int(np.count_nonzero(lhs[usable] > modulus * den[usable]))
    return ContractionReport(
        contraction_class=contraction_class,
        modulus=modulus,
        pairs_checked=n_usable,
        pairs_skipped=int(total - n_usable),
        max_ratio=float(ratios[worst]),
        worst_pair=pair_at(worst),
        violations=violations,
    )


def estimate_modulus(target, contraction_class: str, sampler) -> float:
    """Largest observed ratio for the class: a lower bound on the true modulus."""
    report = check_contraction(target, contraction_class, 0.5, sampler)
    return report.max_ratio


@dataclass(frozen=True)
class FixedPointResult:
    x_star: float
    iterations: int
    trajectory: tuple
    converged: bool
    residual: float


def iterate_to_fixed_point(target: ScalarMap, x0: float, tol: float,
                           max_iters: int = 200) -> FixedPointResult:
    """Iterate x <- t(x) until |t(x) - x| <= tol, recording the trajectory.

    Hitting max_iters returns converged=False with the full trajectory, never
    a silent partial answer.
    """
    if tol <= 0.0:
        raise DomainError("tol must be positive")
    x = float(x0)
    trajectory = [x]
    iterations = 0
    residual = abs(target(x) - x)
    while residual > tol and iterations < max_iters:
        x = target(x)
        trajectory.append(x)
        iterations += 1
        residual = abs(target(x) - x)
    return FixedPointResult(x, iterations, tuple(trajectory), residual <= tol, residual)


def random_value_batch(n_states: int, count: int, seed: int,
                       low: float = -5.0, high: float = 5.0) -> np.ndarray:
    """(count, n_states) array of seeded uniform value-function samples."""
    rng = np.random.default_rng(seed)
    return rng.uniform(low, high, size=(count, n_states))
