"""Randomized multistep policy iteration.

Each iteration derives the greedy policy mu_k (so the policy operator applied
to V_k reproduces the optimality step exactly), then draws one Bernoulli(p_k)
variate: with probability p_k the next iterate is F_mu V_k, otherwise the
multistep lambda operator F_mu^lambda V_k.  Iteration stops when the
optimality residual ||F V_k - V_k|| reaches stop_tol, which the gamma bound
converts into a certified distance from the optimal value.

Randomness contract: branch draws come from numpy's Philox counter-based
generator keyed by the run seed, one draw per iteration (consumed even when
lambda = 0 makes the branches identical, so traces stay comparable across
lambda).  Changing the generator is a breaking change; traces are golden
filed in the test suite.

The initial-condition guard requires F V_0 < V_0 strictly pointwise (build
such a V_0 by shifting any value function up by c * nu).  Under it every run
is pinned between the optimal value and the deterministic envelope F^k V_0,
and the trace records both checks when an oracle optimal value is supplied.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .bellman_ops import (LambdaOperatorConfig, apply_lambda_operator,
                          apply_optimality_operator, gamma_bound_constant)
from .dp_model import FiniteMdp
from .errors import DimensionError, DomainError, PreconditionError
from .value_space import (ValueFunction, pointwise_leq, pointwise_lt,
                          weighted_distance)

BRANCH_POLICY = "policy_step"
BRANCH_LAMBDA = "lambda_step"


@dataclass(frozen=True)
class ConstantP:
    """Constant randomization probability."""

    p: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"p must lie strictly inside (0, 1), got {self.p!r}")

    def at(self, k: int) -> float:
        return self.p


@dataclass(frozen=True)
class GeometricP:
    """p_k = p0 * beta^k, clipped below at p_min (so p_k stays in (0, 1))."""

    p0: float
    beta: float
    p_min: float

    def __post_init__(self):
        if not 0.0 < self.p0 < 1.0:
            raise DomainError(f"p0 must lie strictly inside (0, 1), got {self.p0!r}")
        if not 0.0 < self.beta <= 1.0:
            raise DomainError(f"beta must lie in (0, 1], got {self.beta!r}")
        if not 0.0 < self.p_min <= self.p0:
            raise DomainError(f"p_min must lie in (0, p0], got {self.p_min!r}")

    def at(self, k: int) -> float:
        return max(self.p0 * self.beta**k, self.p_min)


@dataclass(frozen=True)
class PirConfig:
    """Full run configuration; a run is a deterministic function of
    (model, v0, config)."""

    lambda_cfg: LambdaOperatorConfig = LambdaOperatorConfig()
    p: ConstantP | GeometricP | float = 0.5
    stop_tol: float = 1e-8
    max_iterations: int = 10_000
    seed: int = 0
    sigma: float | None = None           # certificate modulus; model's when None
    enforce_initial_condition: bool = True

    def __post_init__(self):
        if isinstance(self.p, float):
            object.__setattr__(self, "p", ConstantP(self.p))
        if not self.stop_tol > 0.0:
            raise DomainError("stop_tol must be positive")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must fit in 64 unsigned bits")

    def echo(self) -> dict:
        p = self.p
        sched = ({"type": "constant", "p": p.p} if isinstance(p, ConstantP)
                 else {"type": "geometric", "p0": p.p0, "beta": p.beta, "p_min": p.p_min})
        return {
            "lambda": self.lambda_cfg.lam,
            "truncation_tol": self.lambda_cfg.truncation_tol,
            "max_terms": self.lambda_cfg.max_terms,
            "exponent_convention": self.lambda_cfg.exponent_convention,
            "p_schedule": sched,
            "stop_tol": self.stop_tol,
            "max_iterations": self.max_iterations,
            "seed": self.seed,
            "sigma": self.sigma,
            "enforce_initial_condition": self.enforce_initial_condition,
        }


def make_rng(seed: int) -> np.random.Generator:
    """The branch-draw generator: Philox keyed by the run seed."""
    return np.random.Generator(np.random.Philox(key=seed))


def _branch_step(model, v_k, fv, mu, cfg, rng, k):
    draw = rng.random()
    if draw < cfg.p.at(k):
        return fv, BRANCH_POLICY
    return apply_lambda_operator(model, mu, v_k, cfg.lambda_cfg).value, BRANCH_LAMBDA


def pir_step(model: FiniteMdp, v_k: ValueFunction, cfg: PirConfig,
             rng: np.random.Generator, k: int = 0):
    """One randomized iteration; advances rng by exactly one draw.

    Returns (v_next, mu_k, branch, rng).  mu_k is greedy at v_k, so the
    policy branch equals the optimality step exactly.
    """
    fv, mu = apply_optimality_operator(model, v_k)
    v_next, branch = _branch_step(model, v_k, fv, mu, cfg, rng, k)
    return v_next, mu, branch, rng


@dataclass(frozen=True)
class PirIteration:
    k: int
    branch: str
    policy: tuple
    residual: float
    certified_bound: float
    monotone_decrease: bool
    sandwich_ok: bool | None
    wall_time_ns: int


@dataclass
class PirTrace:
    """Per-iteration records plus the run outcome."""

    seed: int
    iterations: list = field(default_factory=list)
    converged: bool = False
    n_iterations: int = 0
    final_residual: float = np.inf
    final_values: ValueFunction | None = None
    wall_time_ns_total: int = 0

    def to_csv(self, path, include_timings: bool = False) -> None:
        """Write the trace table.

        By default the wall_time_ns column is zeroed so that identical runs
        produce byte-identical files; pass include_timings=True for the
        measured values (timings are always present in the metadata).
        """
        lines = ["k,branch,residual,certified_bound,wall_time_ns"]
        for rec in self.iterations:
            ns = rec.wall_time_ns if include_timings else 0
            lines.append(f"{rec.k},{rec.branch},{rec.residual!r},{rec.certified_bound!r},{ns}")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")

    def metadata(self, cfg: PirConfig) -> dict:
        return {
            "schema_version": 1,
            "seed": self.seed,
            "converged": self.converged,
            "iterations": self.n_iterations,
            "final_residual": self.final_residual,
            "wall_time_ns_total": self.wall_time_ns_total,
            "config": cfg.echo(),
        }


def check_initial_condition(model: FiniteMdp, v0: ValueFunction) -> None:
    """Raise PreconditionError (naming the states) unless F v0 < v0 pointwise."""
    fv0, _ = apply_optimality_operator(model, v0)
    if not pointwise_lt(fv0, v0):
        bad = np.flatnonzero(fv0.values >= v0.values)
        raise PreconditionError(
            "F V_0 < V_0 fails at state(s) " + ", ".join(str(int(x)) for x in bad))


def run_pir(model: FiniteMdp, v0: ValueFunction, cfg: PirConfig,
            oracle: ValueFunction | None = None,
            oracle_slack: float = 1e-9):
    """Run the randomized iteration until the residual reaches stop_tol.

    When ``oracle`` (an optimal-value estimate) is given, each record checks
    the two-sided envelope: oracle - oracle_slack * nu <= V_k from below, and
    F^k V_0 plus k accumulated truncation tolerances from above.

    Returns (final value function, trace); nonconvergence is reported through
    trace.converged, never silently.
    """
    if len(v0) != model.n_states:
        raise DimensionError(f"v0 length {len(v0)} != n_states {model.n_states}")
    if cfg.enforce_initial_condition:
        check_initial_condition(model, v0)
    nu = model.weights
    sigma = cfg.sigma if cfg.sigma is not None else model.contraction_modulus
    gamma = gamma_bound_constant(sigma)
    slack_step = cfg.lambda_cfg.truncation_tol
    rng = make_rng(cfg.seed)
    trace = PirTrace(seed=cfg.seed)
    v = v0
    envelope = v0 if oracle is not None else None
    t_start = time.perf_counter_ns()
    for k in range(cfg.max_iterations):
        t0 = time.perf_counter_ns()
        fv, mu = apply_optimality_operator(model, v)
        residual = weighted_distance(fv, v, nu)
        if residual <= cfg.stop_tol:
            trace.converged = True
            trace.final_residual = residual
            break
        v_next, branch = _branch_step(model, v, fv, mu, cfg, rng, k)
        monotone = pointwise_leq(v_next, ValueFunction(v.values + slack_step * nu.weights))
        sandwich = None
        if oracle is not None:
            envelope = apply_optimality_operator(model, envelope)[0]
            lower = oracle.values - oracle_slack * nu.weights
            upper = envelope.values + (k + 1) * slack_step * nu.weights
            sandwich = bool(np.all(lower <= v_next.values) and np.all(v_next.values <= upper))
        trace.iterations.append(PirIteration(
            k=k, branch=branch, policy=mu.choice, residual=residual,
            certified_bound=gamma * residual, monotone_decrease=monotone,
            sandwich_ok=sandwich, wall_time_ns=time.perf_counter_ns() - t0))
        v = v_next
    else:
        fv, _ = apply_optimality_operator(model, v)
        trace.final_residual = weighted_distance(fv, v, nu)
        trace.converged = trace.final_residual <= cfg.stop_tol
    trace.n_iterations = len(trace.iterations)
    trace.final_values = v
    trace.wall_time_ns_total = time.perf_counter_ns() - t_start
    return v, trace


@dataclass(frozen=True)
class RunBatchSummary:
    """Aggregate of independent runs; aggregation is commutative, so batch
    order and partitioning cannot change the summary."""

    seeds_run: tuple
    n_converged: int
    max_iterations_converged: int
    max_final_error: float | None
    failures: tuple    # (seed, message) pairs

    @classmethod
    def merge(cls, a: "RunBatchSummary", b: "RunBatchSummary") -> "RunBatchSummary":
        errs = [e for e in (a.max_final_error, b.max_final_error) if e is not None]
        return cls(
            seeds_run=a.seeds_run + b.seeds_run,
            n_converged=a.n_converged + b.n_converged,
            max_iterations_converged=max(a.max_iterations_converged, b.max_iterations_converged),
            max_final_error=max(errs) if errs else None,
            failures=a.failures + b.failures,
        )


def run_batch(model: FiniteMdp, v0, cfg: PirConfig, seeds,
              oracle: ValueFunction | None = None) -> RunBatchSummary:
    """Independent runs differing only in seed; per-run errors become failure
    entries instead of aborting the batch.

    ``v0`` is a ValueFunction shared by all runs, or a callable model -> V_0.
    """
    seeds = tuple(int(s) for s in seeds)
    if not seeds:
        raise DomainError("seeds must be nonempty")
    v0_fn = v0 if callable(v0) else (lambda _model: v0)
    n_converged = 0
    max_iters = 0
    max_err = None
    failures = []
    for seed in seeds:
        try:
            final, trace = run_pir(model, v0_fn(model), replace(cfg, seed=seed), oracle=oracle)
        except Exception as exc:  # noqa: BLE001 - per-seed failures are data
            failures.append((seed, str(exc)))
            continue
        if trace.converged:
            n_converged += 1
            max_iters = max(max_iters, trace.n_iterations)
        if oracle is not None:
            err = weighted_distance(final, oracle, model.weights)
            max_err = err if max_err is None else max(max_err, err)
    return RunBatchSummary(seeds, n_converged, max_iters, max_err, tuple(failures))
