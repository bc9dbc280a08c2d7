"""Compiled inner loops.

Everything here works on plain floats and numpy arrays; the public modules wrap
these with validation.  Lattice coordinates are always evaluated as
``(B[i,0]*k1 + B[i,1]*k2) + B[i,2]*k3`` so that every path producing a lattice
point agrees bit for bit.  ``fastmath`` stays off for the same reason.
"""
import math

import numpy as np
from numba import njit, prange

BUDGET_EXCEEDED = -1


# -- counting ----------------------------------------------------------------

@njit(cache=True)
def count_products_grid(x1, x2, a, b, c, q_ends):
    """Counts of ``a < |qx1-p1||qx2-p2| q < b`` with both distances ``<= c``.

    ``q_ends`` is an increasing array of exclusive upper bounds for ``q``; the
    result holds one cumulative count per bound.  For ``c < 1`` the only
    admissible ``p`` are ``floor(qx)`` and ``floor(qx) + 1``.
    """
    out = np.zeros(q_ends.shape[0], dtype=np.int64)
    total = 0
    j = 0
    q_last = q_ends[q_ends.shape[0] - 1]
    for q in range(1, q_last):
        while q >= q_ends[j]:
            out[j] = total
            j += 1
        qf = float(q)
        t1 = qf * x1
        f1 = math.floor(t1)
        lo1 = t1 - f1
        hi1 = (f1 + 1.0) - t1
        t2 = qf * x2
        f2 = math.floor(t2)
        lo2 = t2 - f2
        hi2 = (f2 + 1.0) - t2
        for s in range(2):
            d1 = lo1 if s == 0 else hi1
            if d1 > c:
                continue
            for r in range(2):
                d2 = lo2 if r == 0 else hi2
                if d2 > c:
                    continue
                prod = d1 * d2 * qf
                if a < prod and prod < b:
                    total += 1
    while j < q_ends.shape[0]:
        out[j] = total
        j += 1
    return out


@njit(parallel=True, cache=True)
def count_products_batch(x1s, x2s, a, b, c, q_ends):
    n = x1s.shape[0]
    out = np.empty((n, q_ends.shape[0]), dtype=np.int64)
    for i in prange(n):
        out[i, :] = count_products_grid(x1s[i], x2s[i], a, b, c, q_ends)
    return out


@njit(cache=True)
def count_small_products(x1, x2, thr, c, q_end):
    """Count solutions with product in ``(0, thr]``, distances ``<= c``, ``1 <= q < q_end``."""
    total = 0
    for q in range(1, q_end):
        qf = float(q)
        t1 = qf * x1
        f1 = math.floor(t1)
        lo1 = t1 - f1
        hi1 = (f1 + 1.0) - t1
        t2 = qf * x2
        f2 = math.floor(t2)
        lo2 = t2 - f2
        hi2 = (f2 + 1.0) - t2
        for s in range(2):
            d1 = lo1 if s == 0 else hi1
            if d1 > c:
                continue
            for r in range(2):
                d2 = lo2 if r == 0 else hi2
                if d2 > c:
                    continue
                prod = d1 * d2 * qf
                if 0.0 < prod and prod <= thr:
                    total += 1
    return total


@njit(parallel=True, cache=True)
def count_small_products_batch(x1s, x2s, thr, c, q_end):
    n = x1s.shape[0]
    out = np.empty(n, dtype=np.int64)
    for i in prange(n):
        out[i] = count_small_products(x1s[i], x2s[i], thr, c, q_end)
    return out


# -- box enumeration -----------------------------------------------------------

@njit(cache=True)
def _coord(B, i, k1, k2, k3):
    return (B[i, 0] * k1 + B[i, 1] * k2) + B[i, 2] * k3


@njit(cache=True)
def _k_range(diag, resid, lo, hi):
    # integers k with diag*k + resid in [lo, hi], widened by one on each side;
    # callers re-check the exact coordinate
    u = (lo - resid) / diag
    v = (hi - resid) / diag
    if u > v:
        u, v = v, u
    return math.ceil(u) - 1, math.floor(v) + 1


@njit(cache=True)
def tri_enumerate(B, lo, hi, out, cap):
    """Walk the nonzero points of an upper-triangular lattice in a closed box.

    Returns ``(count, visited)``; ``count`` is ``BUDGET_EXCEEDED`` once more than
    ``cap`` candidate tuples were inspected.  Points are written to ``out`` while
    it has room.
    """
    count = 0
    visited = 0
    k3a, k3b = _k_range(B[2, 2], 0.0, lo[2], hi[2])
    for k3 in range(k3a, k3b + 1):
        f3 = float(k3)
        v3 = _coord(B, 2, 0.0, 0.0, f3)
        if v3 < lo[2] or v3 > hi[2]:
            continue
        k2a, k2b = _k_range(B[1, 1], B[1, 2] * f3, lo[1], hi[1])
        for k2 in range(k2a, k2b + 1):
            f2 = float(k2)
            v2 = _coord(B, 1, 0.0, f2, f3)
            if v2 < lo[1] or v2 > hi[1]:
                continue
            k1a, k1b = _k_range(B[0, 0], B[0, 1] * f2 + B[0, 2] * f3, lo[0], hi[0])
            for k1 in range(k1a, k1b + 1):
                visited += 1
                if visited > cap:
                    return BUDGET_EXCEEDED, visited
                if k1 == 0 and k2 == 0 and k3 == 0:
                    continue
                f1 = float(k1)
                v1 = _coord(B, 0, f1, f2, f3)
                if v1 < lo[0] or v1 > hi[0]:
                    continue
                if count < out.shape[0]:
                    out[count, 0] = v1
                    out[count, 1] = v2
                    out[count, 2] = v3
                count += 1
    return count, visited


@njit(cache=True)
def inverse3(B):
    a, b, c = B[0, 0], B[0, 1], B[0, 2]
    d, e, f = B[1, 0], B[1, 1], B[1, 2]
    g, h, i = B[2, 0], B[2, 1], B[2, 2]
    A = e * i - f * h
    Bc = -(d * i - f * g)
    C = d * h - e * g
    det = a * A + b * Bc + c * C
    inv = np.empty((3, 3))
    inv[0, 0] = A / det
    inv[1, 0] = Bc / det
    inv[2, 0] = C / det
    inv[0, 1] = -(b * i - c * h) / det
    inv[1, 1] = (a * i - c * g) / det
    inv[2, 1] = -(a * h - b * g) / det
    inv[0, 2] = (b * f - c * e) / det
    inv[1, 2] = -(a * f - c * d) / det
    inv[2, 2] = (a * e - b * d) / det
    return inv


@njit(cache=True)
def det3(B):
    return (B[0, 0] * (B[1, 1] * B[2, 2] - B[1, 2] * B[2, 1])
            - B[0, 1] * (B[1, 0] * B[2, 2] - B[1, 2] * B[2, 0])
            + B[0, 2] * (B[1, 0] * B[2, 1] - B[1, 1] * B[2, 0]))


@njit(cache=True)
def coefficient_bounds(B, lo, hi):
    """Integer coefficient box containing every lattice point of the real box."""
    inv = inverse3(B)
    kmin = np.empty(3, dtype=np.int64)
    kmax = np.empty(3, dtype=np.int64)
    for j in range(3):
        s_lo = 0.0
        s_hi = 0.0
        for i in range(3):
            u = inv[j, i] * lo[i]
            v = inv[j, i] * hi[i]
            s_lo += min(u, v)
            s_hi += max(u, v)
        slack = 1e-9 * (abs(s_lo) + abs(s_hi)) + 1e-9
        kmin[j] = math.floor(s_lo - slack)
        kmax[j] = math.ceil(s_hi + slack)
    return kmin, kmax


@njit(cache=True)
def box_enumerate(B, lo, hi, out, cap):
    """Generic enumeration over the coefficient box; same contract as ``tri_enumerate``."""
    kmin, kmax = coefficient_bounds(B, lo, hi)
    total = 1.0
    for j in range(3):
        total *= float(kmax[j] - kmin[j] + 1)
    if total > cap:
        return BUDGET_EXCEEDED, int(min(total, 9.0e18))
    count = 0
    for k1 in range(kmin[0], kmax[0] + 1):
        for k2 in range(kmin[1], kmax[1] + 1):
            for k3 in range(kmin[2], kmax[2] + 1):
                if k1 == 0 and k2 == 0 and k3 == 0:
                    continue
                f1, f2, f3 = float(k1), float(k2), float(k3)
                v1 = _coord(B, 0, f1, f2, f3)
                if v1 < lo[0] or v1 > hi[0]:
                    continue
                v2 = _coord(B, 1, f1, f2, f3)
                if v2 < lo[1] or v2 > hi[1]:
                    continue
                v3 = _coord(B, 2, f1, f2, f3)
                if v3 < lo[2] or v3 > hi[2]:
                    continue
                if count < out.shape[0]:
                    out[count, 0] = v1
                    out[count, 1] = v2
                    out[count, 2] = v3
                count += 1
    return count, int(total)


# -- reduction and minima --------------------------------------------------------

@njit(cache=True)
def _gram_schmidt(b):
    bs = np.zeros((3, 3))
    mu = np.zeros((3, 3))
    nrm = np.zeros(3)
    for k in range(3):
        for r in range(3):
            bs[r, k] = b[r, k]
        for j in range(k):
            dot = 0.0
            for r in range(3):
                dot += b[r, k] * bs[r, j]
            mu[k, j] = dot / nrm[j]
            for r in range(3):
                bs[r, k] -= mu[k, j] * bs[r, j]
        s = 0.0
        for r in range(3):
            s += bs[r, k] * bs[r, k]
        nrm[k] = s
    return mu, nrm


@njit(cache=True)
def lll_reduce(B, delta=0.99):
    """LLL-reduce a 3x3 basis given by columns; the lattice is unchanged."""
    b = B.copy()
    k = 1
    for _ in range(10000):
        if k >= 3:
            break
        mu, nrm = _gram_schmidt(b)
        for j in range(k - 1, -1, -1):
            if abs(mu[k, j]) > 0.5:
                r = float(round(mu[k, j]))
                for i in range(3):
                    b[i, k] -= r * b[i, j]
                mu, nrm = _gram_schmidt(b)
        if nrm[k] >= (delta - mu[k, k - 1] ** 2) * nrm[k - 1]:
            k += 1
        else:
            for i in range(3):
                b[i, k], b[i, k - 1] = b[i, k - 1], b[i, k]
            k = max(k - 1, 1)
    return b


@njit(cache=True)
def shortest_sup_norm(B, cap):
    """Exact minimum sup-norm over nonzero lattice vectors.

    The reduced basis supplies an attained upper bound ``R``; every vector of
    sup-norm at most ``R`` lies in the coefficient box of ``[-R, R]^3``, so a
    single box scan certifies the minimum.  Returns ``-1.0`` on budget overflow.
    """
    b = lll_reduce(B)
    best = np.inf
    for k in range(3):
        m = max(abs(b[0, k]), abs(b[1, k]), abs(b[2, k]))
        if m < best:
            best = m
    lo = np.full(3, -best)
    hi = np.full(3, best)
    kmin, kmax = coefficient_bounds(b, lo, hi)
    total = 1.0
    for j in range(3):
        total *= float(kmax[j] - kmin[j] + 1)
    if total > cap:
        return -1.0
    for k1 in range(kmin[0], kmax[0] + 1):
        for k2 in range(kmin[1], kmax[1] + 1):
            for k3 in range(kmin[2], kmax[2] + 1):
                if k1 == 0 and k2 == 0 and k3 == 0:
                    continue
                f1, f2, f3 = float(k1), float(k2), float(k3)
                m = abs(_coord(b, 0, f1, f2, f3))
                if m >= best:
                    continue
                m = max(m, abs(_coord(b, 1, f1, f2, f3)))
                if m >= best:
                    continue
                m = max(m, abs(_coord(b, 2, f1, f2, f3)))
                if m < best:
                    best = m
    return best


@njit(cache=True)
def minima(B, cap):
    """``(s1, s1_star, d)`` for the lattice with column basis ``B``.

    Wedges of two lattice vectors, read through the cross product, are exactly
    the nonzero vectors of ``|det B| * B^{-T} Z^3``; so ``s1_star`` is the sup-norm
    minimum of that lattice.
    """
    d = abs(det3(B))
    s1 = shortest_sup_norm(B, cap)
    dual = inverse3(B).T.copy() * d
    s1s = shortest_sup_norm(dual, cap)
    return s1, s1s, d


@njit(cache=True)
def flowed_torus_basis(alpha1, alpha2, e1, e2, e3):
    # a(t) Lambda_alpha with diagonal entries e1, e2, e3 of a(t)
    B = np.zeros((3, 3))
    B[0, 0] = e1
    B[1, 1] = e2
    B[2, 2] = e3
    B[0, 2] = e1 * alpha1
    B[1, 2] = e2 * alpha2
    return B


@njit(parallel=True, cache=True)
def heights_batch(alpha1s, alpha2s, e1, e2, e3, cap):
    n = alpha1s.shape[0]
    out = np.empty(n)
    for i in prange(n):
        B = flowed_torus_basis(alpha1s[i], alpha2s[i], e1, e2, e3)
        s1, s1s, d = minima(B, cap)
        if s1 < 0 or s1s < 0:
            out[i] = -1.0
        else:
            out[i] = 1.0 / min(s1, s1s, d)
    return out


@njit(parallel=True, cache=True)
def siegel_counts_batch(alpha1s, alpha2s, e1, e2, e3, lo, hi, cap):
    """Box counts for ``a(t) Lambda_alpha`` over a batch of ``alpha``."""
    n = alpha1s.shape[0]
    out = np.empty(n, dtype=np.int64)
    empty = np.empty((0, 3))
    for i in prange(n):
        B = flowed_torus_basis(alpha1s[i], alpha2s[i], e1, e2, e3)
        cnt, _ = tri_enumerate(B, lo, hi, empty, cap)
        out[i] = cnt
    return out
