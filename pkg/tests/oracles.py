"""Independent reference computations used by the tests.

None of these call into ``multclt``; each recomputes its quantity from the
definition by a different route (extended precision, exact rationals,
brute force, quadrature or plain Monte Carlo).
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy import integrate

E = math.e


# -- counting ------------------------------------------------------------------

def _exact_terms(x1, x2, q, c):
    """Exact products ``|qx1-p1||qx2-p2| q`` for admissible ``p`` (distances ``<= c``)."""
    X1, X2, C = Fraction(x1), Fraction(x2), Fraction(c)
    out = []
    for X, acc in ((X1, []), (X2, [])):
        t = q * X
        f = math.floor(t)
        acc.extend(d for d in (abs(t - p) for p in range(f - 1, f + 3)) if d <= C)
        out.append(acc)
    return [d1 * d2 * q for d1 in out[0] for d2 in out[1]]


def count_oracle(x1, x2, a, b, c, T, chunk=200_000, tol=1e-12, return_near=False):
    """``N_{a,b,T}(x)`` in 80-bit arithmetic, exact rationals near the thresholds.

    Terms with ``|prod - a|`` or ``|prod - b|`` below ``tol * q`` are decided in
    exact arithmetic; with ``return_near`` their number is returned as well.
    """
    X = (np.longdouble(x1), np.longdouble(x2))
    A, B, C = np.longdouble(a), np.longdouble(b), np.longdouble(c)
    Xf = (Fraction(x1), Fraction(x2))
    fa, fb, fc = Fraction(a), Fraction(b), Fraction(c)
    shifts = (-1, 0, 1, 2)  # every integer within distance < 1 of q x
    total = n_near = 0
    q_end = math.ceil(T)
    for start in range(1, q_end, chunk):
        q = np.arange(start, min(start + chunk, q_end), dtype=np.int64)
        ql = q.astype(np.longdouble)
        t = [ql * Xi for Xi in X]
        f = [np.floor(ti) for ti in t]
        for k1 in shifts:
            d1 = np.abs(t[0] - (f[0] + k1))
            for k2 in shifts:
                d2 = np.abs(t[1] - (f[1] + k2))
                prod = d1 * d2 * ql
                ok = (d1 <= C) & (d2 <= C)
                near = (np.abs(prod - A) < tol * ql) | (np.abs(prod - B) < tol * ql)
                total += int(np.count_nonzero(ok & ~near & (prod > A) & (prod < B)))
                n_near += int(np.count_nonzero(near & ok))
                for qq in q[near]:
                    qq = int(qq)
                    e1 = abs(qq * Xf[0] - (math.floor(qq * Xf[0]) + k1))
                    e2 = abs(qq * Xf[1] - (math.floor(qq * Xf[1]) + k2))
                    if e1 <= fc and e2 <= fc and fa < e1 * e2 * qq < fb:
                        total += 1
    return (total, n_near) if return_near else total


def count_exact(x1, x2, a, b, c, T):
    """Fully rational count; only practical for small ``T``."""
    fa, fb = Fraction(a), Fraction(b)
    return sum(
        1
        for q in range(1, math.ceil(T))
        for prod in _exact_terms(x1, x2, q, c)
        if fa < prod < fb
    )


def count_small_exact(x1, x2, thr, c, T):
    ft = Fraction(thr)
    return sum(
        1
        for q in range(1, math.ceil(T))
        for prod in _exact_terms(x1, x2, q, c)
        if 0 < prod <= ft
    )


# -- lattices --------------------------------------------------------------------

def lattice_points_brute(B, lo, hi, R):
    """Nonzero ``B k`` with ``|k_i| <= R`` inside the closed box, as sorted tuples."""
    B = np.asarray(B, dtype=float)
    r = np.arange(-R, R + 1, dtype=float)
    k1, k2, k3 = (g.ravel() for g in np.meshgrid(r, r, r, indexing="ij"))
    pts = np.stack([(B[i, 0] * k1 + B[i, 1] * k2) + B[i, 2] * k3 for i in range(3)], axis=1)
    nz = (k1 != 0) | (k2 != 0) | (k3 != 0)
    inside = nz & np.all(pts >= np.asarray(lo), axis=1) & np.all(pts <= np.asarray(hi), axis=1)
    return sorted(map(tuple, pts[inside]))


def ball_points(B, R):
    """All nonzero points of ``B Z^3`` with sup norm ``<= R``.

    Upper-triangular bases are scanned layer by layer (``k3``, then ``k2``, then
    the ``k1`` interval); other bases over the integer box
    ``|k_i| <= R * ||row_i(B^-1)||_1``.  Both scans are exhaustive.
    """
    B = np.asarray(B, dtype=float)
    if B[1, 0] == 0 and B[2, 0] == 0 and B[2, 1] == 0:
        pts = []
        K3 = int(math.floor(R / abs(B[2, 2])))
        for k3 in range(-K3, K3 + 1):
            c2 = B[1, 2] * k3
            k2s = range(math.ceil((-R - c2) / B[1, 1] - 1), math.floor((R - c2) / B[1, 1] + 1) + 1)
            for k2 in k2s:
                c1 = B[0, 1] * k2 + B[0, 2] * k3
                lo, hi = sorted(((-R - c1) / B[0, 0], (R - c1) / B[0, 0]))
                for k1 in range(math.ceil(lo) - 1, math.floor(hi) + 2):
                    pts.append((k1, k2, k3))
        k = np.array(pts, dtype=float).reshape(-1, 3)
        k1, k2, k3 = k[:, 0], k[:, 1], k[:, 2]
    else:
        Binv = np.linalg.inv(B)
        K = [int(math.floor(R * np.abs(Binv[i]).sum() + 1e-9)) for i in range(3)]
        axes = [np.arange(-m, m + 1, dtype=float) for m in K]
        k1, k2, k3 = (g.ravel() for g in np.meshgrid(*axes, indexing="ij"))
    V = np.stack([(B[i, 0] * k1 + B[i, 1] * k2) + B[i, 2] * k3 for i in range(3)], axis=1)
    keep = ((k1 != 0) | (k2 != 0) | (k3 != 0)) & (np.max(np.abs(V), axis=1) <= R)
    return V[keep]


def minima_brute(B):
    """``(s1, s1*)`` in the sup norm by exhaustive enumeration.

    Minkowski's theorems for the unit cube give ``s1 <= 1`` and
    ``s1 s2^2 <= 1``, so the ball of radius ``max(1, s1^-1/2)`` holds two
    independent vectors.  For ``s1*``, a
    Gauss-reduced basis ``u, v`` of the minimising plane has Euclidean
    ``|u| |v| <= (2/sqrt 3) |u x v| <= 2 s1*`` and ``|u| >= s1``, so both vectors
    have sup norm at most ``2 s1* / s1``; any wedge found gives an upper bound
    for ``s1*``, and the ball of that radius is then searched completely.
    """
    B = np.asarray(B, dtype=float)
    s1 = float(np.max(np.abs(ball_points(B, 1.0)), axis=1).min())
    V = ball_points(B, max(1.0, s1**-0.5) * (1 + 1e-12))

    def min_wedge(W):
        cr = np.cross(W[:, None, :], W[None, :, :]).reshape(-1, 3)
        n = np.max(np.abs(cr), axis=1)
        return float(n[n > 1e-9].min())

    ub = min_wedge(V)
    R = 2.0 * ub / s1
    W = ball_points(B, R)
    if len(W) > 6000:
        raise RuntimeError(f"wedge search too large ({len(W)} vectors)")
    return s1, min(ub, min_wedge(W))


def height_brute(B):
    s1, s1s = minima_brute(B)
    return 1.0 / min(s1, s1s, 1.0)


def flowed_torus_basis(x1, x2, n):
    e1, e2 = math.exp(n[0]), math.exp(n[1])
    return np.array([[e1, 0.0, e1 * x1], [0.0, e2, e2 * x2], [0.0, 0.0, math.exp(-n[0] - n[1])]])


# -- volumes ---------------------------------------------------------------------

def v_pq_m_quadrature(p, q, m1, m2, c, epsabs=1e-13, epsrel=1e-10):
    """``Vol(p^-1 a(m) Delta_c  cap  q^-1 Delta_c)`` by 2-D adaptive quadrature.

    A point ``z`` lies in both sets when ``q z`` and ``p a(m)^-1 z`` are in
    ``Delta_c``; the ``y``-section is ``(0, max(p, q)^-3 / (x1 x2)]``, read off
    from both product constraints, integrated over the positive quadrant and
    multiplied by the four sign choices.
    """
    lo = c / E

    def window(m):
        # q x in (lo, c]  and  p e^{-m} x in (lo, c]
        a = max(lo / q, lo * math.exp(m) / p)
        b = min(c / q, c * math.exp(m) / p)
        return a, b

    (a1, b1), (a2, b2) = window(m1), window(m2)
    if a1 >= b1 or a2 >= b2:
        return 0.0

    def section(x2, x1):
        return min(1.0 / p**3, 1.0 / q**3) / (x1 * x2)

    val, _ = integrate.nquad(section, [(a2, b2), (a1, b1)], opts={"epsabs": epsabs, "epsrel": epsrel})
    return 4.0 * val


def omega_volume_mc(a, b, c, T, n=10**7, seed=12345, chunk=10**6):
    """Rejection Monte Carlo over ``[-c, c]^2 x [1, T]``; returns ``(estimate, stderr)``."""
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < n:
        m = min(chunk, n - done)
        x = rng.uniform(-c, c, size=(m, 2))
        y = rng.uniform(1.0, T, size=m)
        prod = np.abs(x[:, 0] * x[:, 1]) * y
        hits += int(np.count_nonzero((prod > a) & (prod < b)))
        done += m
    box = 4 * c * c * (T - 1)
    f = hits / n
    return box * f, box * math.sqrt(f * (1 - f) / n)


# -- tessellation ------------------------------------------------------------------

def cells_scan(x1, x2, y, a, b, c, T):
    """Scan every ``n`` in a generous square (no index-set filter) for ``a(n) z`` in the cell.

    Vectorised over points.  Returns ``(hits, n1, n2, margin)``: the number of
    cells containing each point, the last such ``n``, and the smallest relative
    distance of any flowed coordinate or of the product to a cell boundary.
    """
    x1, x2, y = (np.atleast_1d(np.asarray(v, dtype=float)) for v in (x1, x2, y))
    top = int(math.ceil(math.log(T * c * c / a))) + 2
    lo = c / E
    ax1, ax2 = np.abs(x1), np.abs(x2)
    prod = ax1 * ax2 * y
    prod_ok = (a < prod) & (prod <= b)
    margin = np.minimum(np.abs(prod - a) / a, np.abs(prod - b) / b)
    hits = np.zeros(x1.shape, dtype=np.int64)
    n1 = np.full(x1.shape, -1)
    n2 = np.full(x1.shape, -1)
    for k1 in range(top + 1):
        u1 = ax1 * math.exp(k1)
        for k2 in range(top + 1):
            u2 = ax2 * math.exp(k2)
            s = math.exp(-k1 - k2)
            w = y * s
            ok = prod_ok & (lo < u1) & (u1 <= c) & (lo < u2) & (u2 <= c) & (s <= w) & (w < T * s)
            for val, edge in ((u1, lo), (u1, c), (u2, lo), (u2, c), (w, s), (w, T * s)):
                margin = np.minimum(margin, np.abs(val - edge) / edge)
            hits += ok
            n1 = np.where(ok, k1, n1)
            n2 = np.where(ok, k2, n2)
    return hits, n1, n2, margin


def omega_uniform(a, b, c, T, n, rng, chunk=10**6):
    """``n`` points uniform in ``Omega_{a,b,T}`` by rejection from ``[-c, c]^2 x [1, T)``."""
    out = []
    got = 0
    while got < n:
        x = rng.uniform(-c, c, size=(chunk, 2))
        y = rng.uniform(1.0, T, size=chunk)
        prod = np.abs(x[:, 0] * x[:, 1]) * y
        keep = (prod > a) & (prod < b)
        pts = np.column_stack([x[keep], y[keep]])
        out.append(pts)
        got += len(pts)
    return np.concatenate(out)[:n]


# -- statistics --------------------------------------------------------------------

def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def cumulant_by_partitions(values, r):
    """``sum_P (-1)^{|P|-1} (|P|-1)! prod_{B in P} E[X^{|B|}]`` with plug-in raw moments."""
    v = np.asarray(values, dtype=float)
    raw = {k: float(np.mean(v**k)) for k in range(1, r + 1)}
    total = 0.0
    for part in set_partitions(list(range(r))):
        k = len(part)
        total += (-1) ** (k - 1) * math.factorial(k - 1) * math.prod(raw[len(blk)] for blk in part)
    return total


def pair_sum_max_cubed(N):
    """``sum_{p, q <= N} max(p, q)^-3`` grouped by ``n = max(p, q)``."""
    return math.fsum((2 * n - 1) / n**3 for n in range(1, N + 1))
