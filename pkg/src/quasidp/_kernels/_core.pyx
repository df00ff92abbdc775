# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the sequential operator-application loops.

Same contract as ``fallback.py``.  Row dot products use a fixed ascending
summation order, so a policy step and the optimality step yield bit-identical
values for the same rows.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline double _row_dot(const double[:, ::1] P, Py_ssize_t i, const double[::1] v) noexcept nogil:
    cdef double s = 0.0
    cdef Py_ssize_t j
    for j in range(P.shape[1]):
        s += P[i, j] * v[j]
    return s


cdef inline double _wnorm_diff(const double[::1] a, const double[::1] b, const double[::1] nu) noexcept nogil:
    cdef double m = 0.0
    cdef double d
    cdef Py_ssize_t i
    for i in range(a.shape[0]):
        d = a[i] - b[i]
        if d < 0.0:
            d = -d
        d = d / nu[i]
        if d > m:
            m = d
    return m


cdef void _optimality(const double[::1] pair_g, const double[:, ::1] pair_P,
                      const long long[::1] offsets, double alpha, const double[::1] v,
                      double[::1] out, long long[::1] argpos) noexcept nogil:
    cdef Py_ssize_t x, i, n = offsets.shape[0] - 1
    cdef double h, best
    cdef Py_ssize_t best_i
    for x in range(n):
        best_i = offsets[x]
        best = pair_g[best_i] + alpha * _row_dot(pair_P, best_i, v)
        for i in range(offsets[x] + 1, offsets[x + 1]):
            h = pair_g[i] + alpha * _row_dot(pair_P, i, v)
            if h < best:
                best = h
                best_i = i
        out[x] = best
        if argpos is not None:
            argpos[x] = best_i - offsets[x]


cdef void _policy(const double[::1] pair_g, const double[:, ::1] pair_P,
                  double alpha, const double[::1] v, const long long[::1] rows,
                  double[::1] out) noexcept nogil:
    cdef Py_ssize_t x, i
    for x in range(rows.shape[0]):
        i = rows[x]
        out[x] = pair_g[i] + alpha * _row_dot(pair_P, i, v)


def optimality_apply(pair_g, pair_P, offsets, double alpha, v):
    cdef Py_ssize_t n = offsets.shape[0] - 1
    out = np.empty(n, dtype=np.float64)
    argpos = np.empty(n, dtype=np.int64)
    _optimality(pair_g, pair_P, offsets, alpha, v, out, argpos)
    return out, argpos


def policy_apply(pair_g, pair_P, double alpha, v, rows):
    out = np.empty(rows.shape[0], dtype=np.float64)
    _policy(pair_g, pair_P, alpha, v, rows, out)
    return out


def policy_power(pair_g, pair_P, double alpha, v, rows, long long l):
    cdef long long step
    cur = np.array(v, dtype=np.float64, copy=True)
    nxt = np.empty_like(cur)
    for step in range(l):
        _policy(pair_g, pair_P, alpha, cur, rows, nxt)
        cur, nxt = nxt, cur
    return cur


def policy_series(pair_g, pair_P, double alpha, rows, double khat, nu, v,
                  double lam, bint plus_one, double tol, long long max_terms):
    cdef double total_weight, coef, delta, tail, geo
    cdef long long terms
    cur = np.array(v, dtype=np.float64, copy=True)
    if plus_one:
        nxt = np.empty_like(cur)
        _policy(pair_g, pair_P, alpha, cur, rows, nxt)
        cur = nxt
    if lam == 0.0:
        return cur, 1, 0.0, False
    acc = (1.0 - lam) * cur
    total_weight = 1.0 - lam
    geo = khat / (1.0 - khat)
    terms = 1
    out = cur
    tail = np.inf
    prev = np.empty_like(cur)
    while terms < max_terms:
        prev, cur = cur, prev
        _policy(pair_g, pair_P, alpha, prev, rows, cur)
        delta = _wnorm_diff(cur, prev, nu)
        coef = (1.0 - lam) * lam**terms
        acc += coef * cur
        total_weight += coef
        terms += 1
        out = acc / total_weight
        tail = lam**terms * (_wnorm_diff(out, cur, nu) + delta * geo)
        if tail <= tol:
            return out, terms, tail, False
    return out, terms, tail, True


def value_iterate(pair_g, pair_P, offsets, double alpha, nu, v0, double thresh,
                  long long max_iters):
    cdef long long it
    cdef double diff = np.inf
    cdef Py_ssize_t n = offsets.shape[0] - 1
    v = np.array(v0, dtype=np.float64, copy=True)
    w = np.empty(n, dtype=np.float64)
    for it in range(1, max_iters + 1):
        _optimality(pair_g, pair_P, offsets, alpha, v, w, None)
        diff = _wnorm_diff(w, v, nu)
        v, w = w, v
        if diff <= thresh:
            return v, it, diff
    return v, max_iters, diff
