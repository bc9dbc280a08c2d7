"""Lattices ``Lambda_x``, the diagonal flow, box enumeration and successive minima."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .core import InvalidParameterError

DEFAULT_BUDGET = 10**8
FLOW_LIMIT = 700.0


class EnumerationBudgetError(RuntimeError):
    """The box/lattice combination needs more candidate tuples than allowed."""


class FlowRangeError(OverflowError):
    """Flow exponents so large that ``exp`` would overflow."""


class FlowExponent(NamedTuple):
    t1: float
    t2: float

    def scales(self) -> tuple[float, float, float]:
        """Diagonal entries of ``a(t)``; raises for exponents beyond the float range."""
        t1, t2 = float(self.t1), float(self.t2)
        if not (math.isfinite(t1) and math.isfinite(t2)):
            raise FlowRangeError(f"flow exponent must be finite, got {self!r}")
        if max(abs(t1), abs(t2), abs(t1 + t2)) > FLOW_LIMIT:
            raise FlowRangeError(f"|t| too large for double precision: {self!r}")
        return math.exp(t1), math.exp(t2), math.exp(-t1 - t2)

    def __neg__(self):
        return FlowExponent(-self.t1, -self.t2)


@dataclass(frozen=True, eq=False)
class UnimodularLattice:
    """A lattice in R^3 given by a basis whose columns are the basis vectors."""

    basis: np.ndarray

    def __post_init__(self):
        B = np.array(self.basis, dtype=float)
        if B.shape != (3, 3) or not np.all(np.isfinite(B)):
            raise InvalidParameterError("basis must be a finite 3x3 matrix")
        det = float(_kernels.det3(B))
        scale = float(np.prod(np.linalg.norm(B, axis=0)))
        if scale == 0 or abs(abs(det) - 1.0) > 1e-9 * max(1.0, scale):
            raise InvalidParameterError(f"basis is not unimodular (det={det!r})")
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)

    @property
    def det(self) -> float:
        return float(_kernels.det3(self.basis))

    def is_upper_triangular(self) -> bool:
        B = self.basis
        return B[1, 0] == 0 and B[2, 0] == 0 and B[2, 1] == 0

    def __eq__(self, other):
        return isinstance(other, UnimodularLattice) and np.array_equal(self.basis, other.basis)

    def __hash__(self):
        return hash(self.basis.tobytes())


class MinimaReport(NamedTuple):
    s1: float
    s1_star: float
    d: float
    height: float


def lattice_from_alpha(x1: float, x2: float) -> UnimodularLattice:
    """``Lambda_x = {(q x1 + p1, q x2 + p2, q)}``."""
    if not (math.isfinite(x1) and math.isfinite(x2)):
        raise InvalidParameterError("x must be finite")
    B = np.eye(3)
    B[0, 2] = x1
    B[1, 2] = x2
    return UnimodularLattice(B)


def apply_flow(t: FlowExponent, L: UnimodularLattice) -> UnimodularLattice:
    t = FlowExponent(*t)
    scales = np.array(t.scales())
    return UnimodularLattice(scales[:, None] * L.basis)


def _box_arrays(lo, hi):
    lo = np.asarray(tuple(lo), dtype=float)
    hi = np.asarray(tuple(hi), dtype=float)
    if lo.shape != (3,) or hi.shape != (3,):
        raise InvalidParameterError("box corners must be 3-vectors")
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise InvalidParameterError("box must be finite")
    if np.any(lo > hi):
        raise InvalidParameterError(f"box corners out of order: {lo} > {hi}")
    return lo, hi


def _walk(B, lo, hi, out, budget, triangular):
    if triangular:
        return _kernels.tri_enumerate(B, lo, hi, out, budget)
    return _kernels.box_enumerate(B, lo, hi, out, budget)


def _prepare(L: UnimodularLattice):
    if L.is_upper_triangular():
        return L.basis, True
    return _kernels.lll_reduce(np.ascontiguousarray(L.basis)), False


def count_in_box(L: UnimodularLattice, lo, hi, budget: int = DEFAULT_BUDGET) -> int:
    """Number of nonzero lattice points in the closed box ``[lo, hi]``."""
    lo, hi = _box_arrays(lo, hi)
    B, tri = _prepare(L)
    count, visited = _walk(B, lo, hi, np.empty((0, 3)), budget, tri)
    if count == _kernels.BUDGET_EXCEEDED:
        raise EnumerationBudgetError(f"more than {budget} candidate tuples (saw {visited})")
    return int(count)


def enumerate_in_box(L: UnimodularLattice, lo, hi, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """All nonzero points of ``L`` in the closed box ``[lo, hi]`` as an ``(m, 3)`` array.

    Upper-triangular bases (every ``a(t) Lambda_x``) are walked coordinate by
    coordinate, which costs time proportional to the output plus the number of
    layers.  Other bases are LLL-reduced first and scanned over the integer
    coefficient box obtained from the inverse basis.
    """
    lo, hi = _box_arrays(lo, hi)
    B, tri = _prepare(L)
    count, visited = _walk(B, lo, hi, np.empty((0, 3)), budget, tri)
    if count == _kernels.BUDGET_EXCEEDED:
        raise EnumerationBudgetError(f"more than {budget} candidate tuples (saw {visited})")
    out = np.empty((count, 3))
    if count:
        _walk(B, lo, hi, out, budget, tri)
    return out


def successive_minima(L: UnimodularLattice, budget: int = DEFAULT_BUDGET) -> MinimaReport:
    """Sup-norm minima ``s1``, ``s1*``, ``d`` and the height ``1/min(s1, s1*, d)``."""
    s1, s1s, d = _kernels.minima(np.ascontiguousarray(L.basis), budget)
    if s1 < 0 or s1s < 0:
        raise EnumerationBudgetError("minimum search exceeded the enumeration budget")
    # triple determinants are integer multiples of det(B); unimodular means d = 1
    if abs(d - 1.0) <= 1e-9:
        d = 1.0
    return MinimaReport(float(s1), float(s1s), float(d), 1.0 / min(s1, s1s, d))


def height_of_flowed_torus_lattice(x1: float, x2: float, n: FlowExponent,
                                   budget: int = DEFAULT_BUDGET) -> float:
    n = FlowExponent(*n)
    if n.t1 < 0 or n.t2 < 0:
        raise InvalidParameterError(f"flow exponent must be nonnegative, got {n!r}")
    return successive_minima(apply_flow(n, lattice_from_alpha(x1, x2)), budget).height


def heights_flowed(alphas: np.ndarray, n: FlowExponent, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Vectorised :func:`height_of_flowed_torus_lattice` over rows of ``alphas``."""
    n = FlowExponent(*n)
    if n.t1 < 0 or n.t2 < 0:
        raise InvalidParameterError(f"flow exponent must be nonnegative, got {n!r}")
    alphas = np.ascontiguousarray(alphas, dtype=float)
    e1, e2, e3 = n.scales()
    out = _kernels.heights_batch(alphas[:, 0].copy(), alphas[:, 1].copy(), e1, e2, e3, budget)
    if np.any(out < 0):
        raise EnumerationBudgetError("minimum search exceeded the enumeration budget")
    return out

