"""Pure-numpy kernels; used when the compiled core is unavailable or disabled.

All functions take the flattened dense model layout: one row per admissible
(state, control) pair, rows grouped by state (``offsets`` delimits segments,
within a segment rows are sorted by control id).  A policy is the array of
selected row indices, one per state.

Single-step policy application always evaluates the full pair table and then
selects the policy's rows, so that a policy step and the optimality step
produce bit-identical values for the same rows.
"""

import numpy as np


def _wnorm(diff, nu):
    return float(np.max(np.abs(diff) / nu))


def pairs_apply(pair_g, pair_P, alpha, v):
    # h[i] = g_i + alpha * p_i . v  for every admissible pair i
    return pair_g + alpha * (pair_P @ v)


def optimality_apply(pair_g, pair_P, offsets, alpha, v):
    """Per-state minimum of the pair table; returns (values, argmin positions)."""
    h = pairs_apply(pair_g, pair_P, alpha, v)
    starts = offsets[:-1]
    counts = np.diff(offsets)
    mins = np.minimum.reduceat(h, starts)
    # first row attaining the minimum in each segment (ties -> lowest control id)
    idx = np.arange(h.size, dtype=np.int64)
    cand = np.where(h == np.repeat(mins, counts), idx, h.size)
    first = np.minimum.reduceat(cand, starts)
    return mins, (first - starts).astype(np.int64)


def policy_apply(pair_g, pair_P, alpha, v, rows):
    return pairs_apply(pair_g, pair_P, alpha, v)[rows]


def policy_power(pair_g, pair_P, alpha, v, rows, l):
    w = np.array(v, dtype=np.float64, copy=True)
    for _ in range(l):
        w = policy_apply(pair_g, pair_P, alpha, w, rows)
    return w


def policy_series(pair_g, pair_P, alpha, rows, khat, nu, v, lam, plus_one, tol, max_terms):
    """Renormalized truncated series sum_l (1-lam) lam^l F^{e(l)} v.

    e(l) = l+1 when plus_one else l.  Stops once a computable tail bound for
    the renormalized partial sum drops to ``tol``, or at ``max_terms`` terms.
    Returns (values, terms_used, tail_bound, hit_cap).
    """
    cur = np.array(v, dtype=np.float64, copy=True)
    if plus_one:
        cur = policy_apply(pair_g, pair_P, alpha, cur, rows)
    if lam == 0.0:
        return cur, 1, 0.0, False
    acc = (1.0 - lam) * cur
    total_weight = 1.0 - lam
    geo = khat / (1.0 - khat)
    terms = 1
    out = cur
    tail = np.inf
    while terms < max_terms:
        prev = cur
        cur = policy_apply(pair_g, pair_P, alpha, prev, rows)
        delta = _wnorm(cur - prev, nu)
        coef = (1.0 - lam) * lam**terms
        acc = acc + coef * cur
        total_weight += coef
        terms += 1
        out = acc / total_weight
        # valid bound on || out - exact ||: the dropped tail has total weight
        # lam^terms, every dropped power sits within delta*geo of cur, and out
        # itself is at wnorm(out - cur) from cur
        tail = lam**terms * (_wnorm(out - cur, nu) + delta * geo)
        if tail <= tol:
            return out, terms, tail, False
    return out, terms, float(tail), True


def value_iterate(pair_g, pair_P, offsets, alpha, nu, v0, thresh, max_iters):
    """Iterate the optimality step until ||V_{k+1}-V_k|| <= thresh."""
    v = np.array(v0, dtype=np.float64, copy=True)
    diff = np.inf
    for it in range(1, max_iters + 1):
        w, _ = optimality_apply(pair_g, pair_P, offsets, alpha, v)
        diff = _wnorm(w - v, nu)
        v = w
        if diff <= thresh:
            return v, it, diff
    return v, max_iters, diff
