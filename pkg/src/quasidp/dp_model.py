"""Finite discounted-MDP models and the abstract one-step mapping they realize.

The concrete instance evaluates

    H(x, u, V) = g(x, u) + discount * sum_y p(y | x, u) V(y)

over a finite state set with per-state finite control lists.  Costs are
minimized; argmin ties break toward the lowest control id.  Models are
immutable after construction and safe to share across threads.

Model document format (JSON, UTF-8)::

    {"n_states": 2, "discount": 0.9, "weights": [1.0, 1.0],
     "controls": [[0, 1], [0]],
     "cost": {"0,0": 1.0, "0,1": 2.0, "1,0": 0.0},
     "transition": {"0,0": [1.0, 0.0], "0,1": [0.0, 1.0], "1,0": [0.0, 1.0]}}

Keys of ``cost``/``transition`` are "state,control" pairs.  ``weights`` is
optional and defaults to all ones (the ordinary sup-norm).  Transition rows
must sum to 1 within 1e-12; they are never renormalized silently.
"""

from __future__ import annotations

import abc
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (AdmissibilityError, DimensionError, DomainError,
                     ParseError, ValidationError)
from .value_space import StateSpace, ValueFunction, WeightFunction

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ControlSpace:
    """For each state, the nonempty list of admissible control ids."""

    per_state: tuple

    def __post_init__(self):
        sets = []
        for x, controls in enumerate(self.per_state):
            ids = tuple(int(u) for u in controls)
            if not ids:
                raise ValidationError(f"state {x} has an empty control list")
            if any(u < 0 for u in ids):
                raise ValidationError(f"state {x} has a negative control id")
            if len(set(ids)) != len(ids):
                raise ValidationError(f"state {x} repeats a control id")
            sets.append(tuple(sorted(ids)))
        if not sets:
            raise ValidationError("at least one state is required")
        object.__setattr__(self, "per_state", tuple(sets))

    def __len__(self) -> int:
        return len(self.per_state)

    def __getitem__(self, x: int) -> tuple:
        return self.per_state[x]


@dataclass(frozen=True)
class Policy:
    """One admissible control per state."""

    choice: tuple

    def __post_init__(self):
        object.__setattr__(self, "choice", tuple(int(u) for u in self.choice))

    def __len__(self) -> int:
        return len(self.choice)


class DpModel(abc.ABC):
    """Evaluation contract for a one-step DP mapping.

    Implementations expose the state space, per-state control lists, the
    weight function of the ambient norm, and (when known) a contraction
    modulus usable for certificates.
    """

    state_space: StateSpace
    controls: ControlSpace
    weights: WeightFunction
    contraction_modulus: float | None

    @property
    def n_states(self) -> int:
        return self.state_space.n_states

    @abc.abstractmethod
    def evaluate_H(self, x: int, u: int, v: ValueFunction) -> float:
        """One-step value of control u at state x under continuation values v."""


class FiniteMdp(DpModel):
    """Finite discounted MDP; see the module docstring for the semantics."""

    def __init__(self, controls, cost, transition, discount, weights=None):
        """Build and fully validate a model.

        Args:
            controls: per-state sequences of control ids.
            cost: mapping (state, control) -> finite real cost.
            transition: mapping (state, control) -> probability row over states.
            discount: factor in the open interval (0, 1).
            weights: optional positive per-state weights; defaults to ones.

        Raises ValidationError on any malformed ingredient; the model is never
        partially built.
        """
        self.controls = controls if isinstance(controls, ControlSpace) else ControlSpace(tuple(controls))
        n = len(self.controls)
        self.state_space = StateSpace(n)
        if not (isinstance(discount, (int, float)) and 0.0 < discount < 1.0):
            raise ValidationError(f"discount must lie strictly inside (0, 1), got {discount!r}")
        self.discount = float(discount)
        self.weights = weights if isinstance(weights, WeightFunction) else (
            WeightFunction.ones(n) if weights is None else WeightFunction(weights))
        if len(self.weights) != n:
            raise ValidationError(f"weights length {len(self.weights)} != n_states {n}")

        pair_g, pair_P, offsets, pair_control = [], [], [0], []
        row_of = {}
        for x in range(n):
            for u in self.controls[x]:
                key = (x, u)
                if key not in cost:
                    raise ValidationError(f"missing cost for state {x}, control {u}")
                if key not in transition:
                    raise ValidationError(f"missing transition row for state {x}, control {u}")
                g = float(cost[key])
                if not np.isfinite(g):
                    raise ValidationError(f"cost for state {x}, control {u} is not finite")
                row = np.asarray(transition[key], dtype=np.float64)
                if row.shape != (n,):
                    raise ValidationError(
                        f"transition row for state {x}, control {u} has length {row.size}, expected {n}")
                if not np.all(np.isfinite(row)) or np.any(row < 0.0):
                    raise ValidationError(
                        f"transition row for state {x}, control {u} has a negative or non-finite entry")
                s = float(row.sum())
                if abs(s - 1.0) > ROW_SUM_TOL:
                    raise ValidationError(
                        f"transition row for state {x}, control {u} sums to {s!r}, not 1")
                row_of[key] = len(pair_g)
                pair_g.append(g)
                pair_P.append(row)
                pair_control.append(u)
            offsets.append(len(pair_g))
        extra_cost = set(cost) - set(row_of)
        extra_trans = set(transition) - set(row_of)
        if extra_cost or extra_trans:
            bad = sorted(extra_cost | extra_trans)[0]
            raise ValidationError(f"entry for state {bad[0]}, control {bad[1]} is not an admissible pair")

        self.pair_g = np.array(pair_g, dtype=np.float64)
        self.pair_P = np.ascontiguousarray(np.vstack(pair_P))
        self.offsets = np.array(offsets, dtype=np.int64)
        self.pair_control = np.array(pair_control, dtype=np.int64)
        self._row_of = row_of
        for arr in (self.pair_g, self.pair_P, self.offsets, self.pair_control):
            arr.flags.writeable = False
        self._pad_tables = None
        # contraction modulus of both operators in the ambient weighted norm:
        # discount * max over pairs of (p . nu) / nu(x).  Equals the discount
        # when nu == 1 (rows sum to 1); can reach or exceed 1 for skewed nu,
        # in which case no certificate is available and gamma() will refuse.
        nu = self.weights.weights
        factor = float(np.max((self.pair_P @ nu) / nu[np.repeat(
            np.arange(n), np.diff(self.offsets))]))
        self.contraction_modulus = self.discount if abs(factor - 1.0) <= 1e-9 \
            else self.discount * factor

    # -- evaluation ---------------------------------------------------------

    def evaluate_H(self, x: int, u: int, v: ValueFunction) -> float:
        if len(v) != self.n_states:
            raise DimensionError(f"value function length {len(v)} != n_states {self.n_states}")
        row = self._row_of.get((x, int(u)))
        if row is None:
            raise AdmissibilityError(f"control {u} is not admissible at state {x}")
        return float(self.pair_g[row] + self.discount * (self.pair_P[row] @ v.values))

    def policy_rows(self, mu: Policy) -> np.ndarray:
        """Row indices of a policy's (state, control) pairs; validates admissibility."""
        if len(mu) != self.n_states:
            raise AdmissibilityError(f"policy length {len(mu)} != n_states {self.n_states}")
        rows = np.empty(self.n_states, dtype=np.int64)
        for x, u in enumerate(mu.choice):
            row = self._row_of.get((x, u))
            if row is None:
                raise AdmissibilityError(f"control {u} is not admissible at state {x}")
            rows[x] = row
        return rows

    def policy_of_argpos(self, argpos: np.ndarray) -> Policy:
        """Policy from per-state positions into the sorted control lists."""
        rows = self.offsets[:-1] + argpos
        return Policy(tuple(int(u) for u in self.pair_control[rows]))

    def pad_tables(self):
        """Padded (n_states, max_controls) tables for batched minimization."""
        if self._pad_tables is None:
            n = self.n_states
            counts = np.diff(self.offsets)
            width = int(counts.max())
            rows = np.zeros((n, width), dtype=np.int64)
            mask = np.full((n, width), np.inf)
            for x in range(n):
                c = counts[x]
                rows[x, :c] = np.arange(self.offsets[x], self.offsets[x + 1])
                mask[x, :c] = 0.0
            self._pad_tables = (rows, mask)
        return self._pad_tables

    # -- documents ----------------------------------------------------------

    def to_document(self) -> dict:
        """The JSON-serializable model document (see module docstring)."""
        cost, transition = {}, {}
        for (x, u), row in sorted(self._row_of.items()):
            cost[f"{x},{u}"] = float(self.pair_g[row])
            transition[f"{x},{u}"] = [float(p) for p in self.pair_P[row]]
        return {
            "n_states": self.n_states,
            "discount": self.discount,
            "weights": [float(w) for w in self.weights.weights],
            "controls": [list(self.controls[x]) for x in range(self.n_states)],
            "cost": cost,
            "transition": transition,
        }


def _parse_pair_key(key: str, n_states: int) -> tuple:
    parts = key.split(",")
    try:
        x, u = int(parts[0]), int(parts[1])
    except (ValueError, IndexError):
        raise ValidationError(f"malformed state,control key {key!r}") from None
    if len(parts) != 2 or not 0 <= x < n_states:
        raise ValidationError(f"key {key!r} names a state outside 0..{n_states - 1}")
    return x, u


def model_from_document(doc: dict) -> FiniteMdp:
    """Validate a parsed model document and build the model."""
    if not isinstance(doc, dict):
        raise ValidationError("model document must be a JSON object")
    for field in ("n_states", "discount", "controls", "cost", "transition"):
        if field not in doc:
            raise ValidationError(f"model document is missing the {field!r} field")
    n = doc["n_states"]
    if not isinstance(n, int) or n < 1:
        raise ValidationError(f"n_states must be a positive integer, got {n!r}")
    if len(doc["controls"]) != n:
        raise ValidationError(f"controls lists {len(doc['controls'])} states, n_states says {n}")
    cost = {_parse_pair_key(k, n): v for k, v in doc["cost"].items()}
    transition = {_parse_pair_key(k, n): v for k, v in doc["transition"].items()}
    return FiniteMdp(doc["controls"], cost, transition, doc["discount"], doc.get("weights"))


def load_model(source) -> FiniteMdp:
    """Load a model from a file path, or from model-document text.

    A ``pathlib.Path`` is always read as a file.  A plain string is treated
    as document text when it starts with "{", as a path otherwise.
    """
    if isinstance(source, Path):
        text = source.read_text(encoding="utf-8")
    elif isinstance(source, str) and source.lstrip().startswith("{"):
        text = source
    else:
        text = Path(source).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"model document is not valid JSON: {exc}") from exc
    return model_from_document(doc)


def save_model(model: FiniteMdp, path) -> None:
    Path(path).write_text(json.dumps(model.to_document(), indent=1) + "\n", encoding="utf-8")


def random_mdp(n_states: int, n_controls: int, discount: float, seed: int) -> FiniteMdp:
    """Deterministic random test instance.

    Every state gets controls 0..n_controls-1, costs are uniform on [0, 1],
    transition rows are uniform simplex (Dirichlet(1,..,1)) samples, weights
    are all ones.  The same seed always yields the same model.
    """
    if n_states < 1 or n_controls < 1:
        raise DomainError("n_states and n_controls must be at least 1")
    if not 0.0 < discount < 1.0:
        raise DomainError(f"discount must lie strictly inside (0, 1), got {discount!r}")
    rng = np.random.default_rng(seed)
    controls = [list(range(n_controls))] * n_states
    cost, transition = {}, {}
    for x in range(n_states):
        for u in range(n_controls):
            cost[(x, u)] = float(rng.uniform())
            transition[(x, u)] = rng.dirichlet(np.ones(n_states))
    return FiniteMdp(controls, cost, transition, discount)
