"""Exact evaluation of the counting functions ``N_{a,b,T}(x)`` and ``|Theta_T cap Lambda_x|``."""
from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .core import DomainParams, InvalidParameterError, Point3, in_omega, small_product_threshold
from .lattice import DEFAULT_BUDGET, enumerate_in_box, lattice_from_alpha

MAX_T = 2.0**32
MAX_LATTICE_T = 1e5


def _q_end(T: float) -> int:
    # q ranges over 1 <= q < T
    if T > MAX_T:
        raise InvalidParameterError(f"T={T!r} exceeds the supported range 2^32")
    return max(int(math.ceil(T)), 1)


def _q_ends(T_values) -> np.ndarray:
    ends = np.array([_q_end(float(T)) for T in T_values], dtype=np.int64)
    if np.any(np.diff(ends) < 0):
        raise InvalidParameterError("T values must be nondecreasing")
    return ends


def count_products(x1: float, x2: float, p: DomainParams) -> int:
    """Number of ``(p1, p2, q)`` with ``a < |qx1-p1||qx2-p2| q < b``, distances ``<= c``, ``1 <= q < T``."""
    ends = np.array([_q_end(p.T)], dtype=np.int64)
    return int(_kernels.count_products_grid(float(x1), float(x2), p.a, p.b, p.c, ends)[0])


def count_products_many(xs: np.ndarray, p: DomainParams, T_values=None) -> np.ndarray:
    """Counts for each row of ``xs``.

    With ``T_values`` (nondecreasing) the result has one column per cutoff,
    computed in a single pass over ``q``; otherwise a 1-D array for ``p.T``.
    Rows are independent, so the result does not depend on the thread count.
    """
    xs = np.ascontiguousarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[1] != 2:
        raise InvalidParameterError("xs must have shape (n, 2)")
    grid = T_values is not None
    ends = _q_ends(T_values if grid else [p.T])
    out = _kernels.count_products_batch(xs[:, 0].copy(), xs[:, 1].copy(), p.a, p.b, p.c, ends)
    return out if grid else out[:, 0]


def count_via_lattice(x1: float, x2: float, p: DomainParams, budget: int = DEFAULT_BUDGET) -> int:
    """``|Lambda_x cap Omega|`` by enumerating the lattice in the bounding box of ``Omega``."""
    if p.T > MAX_LATTICE_T:
        raise InvalidParameterError(f"T={p.T!r} too large for lattice enumeration (max {MAX_LATTICE_T:g})")
    L = lattice_from_alpha(float(x1), float(x2))
    pts = enumerate_in_box(L, (-p.c, -p.c, 1.0), (p.c, p.c, p.T), budget)
    if len(pts) == 0:
        return 0
    return int(np.count_nonzero(in_omega(Point3(pts[:, 0], pts[:, 1], pts[:, 2]), p)))


def count_small_products(x1: float, x2: float, K: float, T: float, c: float) -> int:
    """``|Theta_T cap Lambda_x|`` restricted to strictly positive products."""
    if not T > math.e:
        raise InvalidParameterError(f"require T > e, got {T!r}")
    if not K > 0:
        raise InvalidParameterError(f"require K > 0, got {K!r}")
    if not 0 < c < 1:
        raise InvalidParameterError(f"require 0 < c < 1, got {c!r}")
    thr = small_product_threshold(K, T)
    return int(_kernels.count_small_products(float(x1), float(x2), thr, c, _q_end(T)))


def count_small_products_many(xs: np.ndarray, K: float, T: float, c: float) -> np.ndarray:
    if not (T > math.e and K > 0 and 0 < c < 1):
        raise InvalidParameterError("require T > e, K > 0, 0 < c < 1")
    xs = np.ascontiguousarray(xs, dtype=float)
    thr = small_product_threshold(K, T)
    return _kernels.count_small_products_batch(xs[:, 0].copy(), xs[:, 1].copy(), thr, c, _q_end(T))


def discrepancy_from_count(count, vol: float):
    """``(N - vol) / sqrt(vol)``; vectorised over ``count``."""
    if not vol > 0:
        raise InvalidParameterError(f"volume must be positive, got {vol!r}")
    return (np.asarray(count, dtype=float) - vol) / math.sqrt(vol)


def discrepancy(x1: float, x2: float, p: DomainParams, vol: float) -> float:
    if not vol > 0:
        raise InvalidParameterError(f"volume must be positive, got {vol!r}")
    return float(discrepancy_from_count(count_products(x1, x2, p), vol))
