"""Benchmark: compiled kernels vs the numpy fallback on the sequential loops.

The kernels are small-matrix recurrences (value iteration, operator powers,
the truncated multistep series).  At desk scale the per-call dispatch
overhead dominates numpy's arithmetic and the compiled core wins; at larger
state counts the fallback's BLAS matmuls take over and the plain C loops
lose.  Run with --states swept across that range to see the crossover.
Batched sweeps are BLAS bound either way and are not routed through the
extension.

Run:  python benchmarks/bench_kernels.py [--states 50] [--controls 4] [--repeat 5]
"""

import argparse
import time

import numpy as np

from quasidp import random_mdp
from quasidp._kernels import fallback

try:
    from quasidp._kernels import _core
except ImportError:
    _core = None


def best_of(repeat, fn, *args):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--states", type=int, default=50)
    ap.add_argument("--controls", type=int, default=4)
    ap.add_argument("--discount", type=float, default=0.95)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if _core is None:
        print("compiled core not built; nothing to compare")
        return

    m = random_mdp(args.states, args.controls, args.discount, seed=1)
    rng = np.random.default_rng(0)
    v = rng.uniform(-4, 4, args.states)
    rows = (m.offsets[:-1]).astype(np.int64)
    nu = m.weights.weights

    workloads = [
        ("value_iterate to 1e-10", "value_iterate",
         (m.pair_g, m.pair_P, m.offsets, m.discount, nu, v, 1e-10, 100_000)),
        ("policy_power l=10000", "policy_power",
         (m.pair_g, m.pair_P, m.discount, v, rows, 10_000)),
        ("policy_series lam=0.9 tol=1e-12", "policy_series",
         (m.pair_g, m.pair_P, m.discount, rows, m.discount, nu, v, 0.9, True, 1e-12, 100_000)),
        ("optimality_apply x1000", None, None),
    ]

    print(f"model: {args.states} states x {args.controls} controls, "
          f"discount {args.discount}; best of {args.repeat}")
    print(f"{'workload':36s} {'compiled':>12s} {'python':>12s} {'speedup':>8s}")
    for label, name, wargs in workloads:
        if name is None:
            def many(impl):
                for _ in range(1000):
                    impl.optimality_apply(m.pair_g, m.pair_P, m.offsets, m.discount, v)
            tc = best_of(args.repeat, many, _core)
            tp = best_of(args.repeat, many, fallback)
        else:
            tc = best_of(args.repeat, getattr(_core, name), *wargs)
            tp = best_of(args.repeat, getattr(fallback, name), *wargs)
        print(f"{label:36s} {tc * 1e3:10.2f}ms {tp * 1e3:10.2f}ms {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
