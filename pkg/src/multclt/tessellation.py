"""The index set ``F_Omega``, the cells ``Delta_{Omega,n}`` and the locate map.

``Omega`` is the disjoint union of ``a(n)^{-1} Delta_{Omega,n}`` over ``n`` in
``F_Omega``: the flow ``a(n)`` pushes each coordinate of a point into the slab
``(e^{-1}c, c]`` and shifts ``y`` into the window ``[e^{-|n|}, T e^{-|n|})``.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .core import DomainParams, InvalidParameterError, Point3, in_omega, inner_radius


class TessellationError(RuntimeError):
    """``locate`` found no verified cell for a point of ``Omega``."""


class CellIndex(NamedTuple):
    n1: int
    n2: int


def _require_positive_a(p: DomainParams):
    if not p.a > 0:
        raise InvalidParameterError("a = 0 gives an unbounded index set (beta = infinity)")


def index_bounds(p: DomainParams) -> tuple[float, float]:
    """``(alpha, beta)`` with ``alpha = ln(e^-2 c^2 / b)`` and ``beta = ln(T c^2 / a)``."""
    _require_positive_a(p)
    c2 = p.c * p.c
    return math.log(math.exp(-2.0) * c2 / p.b), math.log(p.T * c2 / p.a)


def cells(p: DomainParams) -> list[CellIndex]:
    """Members of ``F_Omega`` in lexicographic order (nonnegative ``n``)."""
    alpha, beta = index_bounds(p)
    out = []
    top = math.ceil(beta)
    for n1 in range(top + 1):
        for n2 in range(top + 1 - n1):
            if alpha <= n1 + n2 < beta:
                out.append(CellIndex(n1, n2))
    return out


def cardinality_bound(p: DomainParams) -> float:
    alpha, beta = index_bounds(p)
    return (beta + 1) * (beta - alpha + 1)


def flow_point(z: Point3, n) -> Point3:
    """``a(n) z``; works on arrays as well as scalars."""
    e1, e2 = math.exp(n[0]), math.exp(n[1])
    e3 = math.exp(-n[0] - n[1])
    return Point3(e1 * z.x1, e2 * z.x2, e3 * z.y)


def in_cell(z: Point3, n, p: DomainParams):
    """Membership of ``z`` in ``Delta_{Omega,n}``."""
    ax1, ax2 = np.abs(z.x1), np.abs(z.x2)
    prod = ax1 * ax2 * z.y
    lo = inner_radius(p.c)
    w = math.exp(-n[0] - n[1])
    return (
        (p.a < prod) & (prod <= p.b)
        & (lo < ax1) & (ax1 <= p.c) & (lo < ax2) & (ax2 <= p.c)
        & (w <= z.y) & (z.y < p.T * w)
    )


def _shell(x: float, c: float) -> int | None:
    # the k >= 0 with e^k |x| in (c/e, c], evaluated exactly as flow_point does
    ax = abs(x)
    if ax == 0 or ax > c:
        return None
    lo = inner_radius(c)
    guess = int(math.floor(math.log(c / ax)))
    for k in (guess, guess - 1, guess + 1):
        if k < 0:
            continue
        v = math.exp(k) * ax
        if lo < v <= c:
            return k
    return None


def locate(z: Point3, p: DomainParams) -> CellIndex | None:
    """The unique ``n`` in ``F_Omega`` with ``a(n) z`` in ``Delta_{Omega,n}``, or ``None`` off ``Omega``."""
    _require_positive_a(p)
    z = Point3(float(z.x1), float(z.x2), float(z.y))
    if not in_omega(z, p):
        return None
    k1, k2 = _shell(z.x1, p.c), _shell(z.x2, p.c)
    if k1 is None or k2 is None:
        raise TessellationError(f"no slab index for {z!r}")
    n = CellIndex(k1, k2)
    alpha, beta = index_bounds(p)
    if not (alpha <= k1 + k2 < beta and in_cell(flow_point(z, n), n, p)):
        raise TessellationError(f"cell {n} failed verification for {z!r}")
    return n


def cell_bounding_box(n, p: DomainParams) -> tuple[Point3, Point3]:
    """``[-c, c]^2 x [a c^-2, e^2 b c^-2]``, a box containing every cell."""
    c2 = p.c * p.c
    return Point3(-p.c, -p.c, p.a / c2), Point3(p.c, p.c, math.exp(2.0) * p.b / c2)
