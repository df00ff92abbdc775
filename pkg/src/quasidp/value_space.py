"""Bounded value functions over a finite state set, with the weighted sup-norm.

The norm is ``||v|| = max_x |v(x)| / nu(x)`` for a strictly positive weight
function ``nu``.  With ``nu == 1`` this is the ordinary sup-norm.  All types
are immutable after construction; the operations are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ValidationError


def _frozen_array(data, name: str) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError(f"{name} must be a nonempty 1-d sequence of reals")
    arr = np.array(arr, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class StateSpace:
    """A finite state set realized as indices 0..n_states-1."""

    n_states: int

    def __post_init__(self):
        if not isinstance(self.n_states, int) or self.n_states < 1:
            raise ValidationError(f"n_states must be a positive integer, got {self.n_states!r}")


@dataclass(frozen=True, eq=False)
class WeightFunction:
    """Strictly positive per-state weights defining the weighted sup-norm."""

    weights: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.weights, "weights")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
            raise ValidationError("weights must be finite and strictly positive")
        object.__setattr__(self, "weights", arr)

    def __len__(self) -> int:
        return self.weights.size

    @classmethod
    def ones(cls, n_states: int) -> "WeightFunction":
        return cls(np.ones(n_states))


@dataclass(frozen=True, eq=False)
class ValueFunction:
    """One finite real value per state."""

    values: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.values, "values")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("value functions must be finite everywhere (no inf, no NaN)")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size

    @classmethod
    def zeros(cls, n_states: int) -> "ValueFunction":
        return cls(np.zeros(n_states))


def _same_length(a, b, what: str):
    if len(a) != len(b):
        raise DimensionError(f"{what}: lengths differ ({len(a)} vs {len(b)})")


def weighted_norm(v: ValueFunction, nu: WeightFunction) -> float:
    """``max_x |v(x)| / nu(x)``; zero exactly when v is the zero function."""
    _same_length(v, nu, "weighted_norm")
    return float(np.max(np.abs(v.values) / nu.weights))


def weighted_distance(v: ValueFunction, w: ValueFunction, nu: WeightFunction) -> float:
    """Weighted sup-norm of ``v - w``."""
    _same_length(v, w, "weighted_distance")
    _same_length(v, nu, "weighted_distance")
    return float(np.max(np.abs(v.values - w.values) / nu.weights))


def pointwise_leq(v: ValueFunction, w: ValueFunction) -> bool:
    """True iff ``v(x) <= w(x)`` for every state."""
    _same_length(v, w, "pointwise_leq")
    return bool(np.all(v.values <= w.values))


def pointwise_lt(v: ValueFunction, w: ValueFunction) -> bool:
    """True iff ``v(x) < w(x)`` for every state (strict everywhere)."""
    _same_length(v, w, "pointwise_lt")
    return bool(np.all(v.values < w.values))


def shift_by_weight(v: ValueFunction, c: float, nu: WeightFunction) -> ValueFunction:
    """The function ``x -> v(x) + c * nu(x)``."""
    _same_length(v, nu, "shift_by_weight")
    return ValueFunction(v.values + c * nu.weights)
