"""Domain parameters and membership predicates for the regions of the counting problem.

All predicates accept either scalars or numpy arrays in the fields of
:class:`Point3`; comparisons are exact floating point, no tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class InvalidParameterError(ValueError):
    """A parameter tuple violates one of its stated invariants."""


@dataclass(frozen=True)
class DomainParams:
    """Parameters ``(a, b, c, T)`` of the domain ``Omega_{a,b,T}``."""

    a: float
    b: float
    c: float
    T: float

    def __post_init__(self):
        for name in ("a", "b", "c", "T"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value!r}")
        if not 0 <= self.a < self.b < 1:
            raise InvalidParameterError(
                f"require 0 <= a < b < 1, got a={self.a!r}, b={self.b!r}"
            )
        if not 0 < self.c < 1:
            raise InvalidParameterError(f"require 0 < c < 1, got c={self.c!r}")
        if not self.T > 1:
            raise InvalidParameterError(f"require T > 1, got T={self.T!r}")

    def as_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "T": self.T}


class Point3(NamedTuple):
    x1: float
    x2: float
    y: float


def inner_radius(c: float) -> float:
    """The lower edge ``e^{-1} c`` of the annular slab ``(e^{-1}c, c]``."""
    return c / math.e


def _product(z: Point3):
    return np.abs(z.x1) * np.abs(z.x2) * z.y


def in_omega(z: Point3, p: DomainParams):
    prod = _product(z)
    return (
        (p.a < prod) & (prod < p.b)
        & (np.abs(z.x1) <= p.c) & (np.abs(z.x2) <= p.c)
        & (1 <= z.y) & (z.y < p.T)
    )


def in_delta_inf(z: Point3):
    prod = _product(z)
    return (0 < prod) & (prod <= 1)


def in_delta_c(z: Point3, c: float):
    lo = inner_radius(c)
    ax1, ax2 = np.abs(z.x1), np.abs(z.x2)
    return in_delta_inf(z) & (lo < ax1) & (ax1 <= c) & (lo < ax2) & (ax2 <= c)


def small_product_threshold(K: float, T: float) -> float:
    """``(ln T)^{-K}``, the product bound defining the small-products set."""
    return math.log(T) ** (-K)


def in_theta(z: Point3, K: float, T: float, c: float):
    """Membership in the small-products set ``Theta_T`` (product at most ``(ln T)^{-K}``).

    Zero products are included here, as in the set's definition; the counting
    routine excludes them separately.
    """
    if not (T > math.e and K > 0):
        raise InvalidParameterError("in_theta requires T > e and K > 0")
    prod = _product(z)
    return (
        (prod <= small_product_threshold(K, T))
        & (np.abs(z.x1) <= c) & (np.abs(z.x2) <= c)
        & (1 <= z.y) & (z.y < T)
    )


def hyperbolic_area(s, c: float):
    """Area of ``{(x1, x2): |x1 x2| <= s, |x1|, |x2| <= c}``.

    Splitting the positive quadrant at ``x1 = s/c`` gives ``s + s ln(c^2/s)``
    for ``0 < s < c^2``; for ``s >= c^2`` the product constraint is vacuous.
    Vectorised over ``s``.
    """
    s = np.asarray(s, dtype=float)
    c2 = c * c
    safe = np.where(s > 0, np.minimum(s, c2), 1.0)
    inner = 4.0 * (safe + safe * (np.log(c2) - np.log(safe)))
    out = np.where(s >= c2, 4.0 * c2, np.where(s > 0, inner, 0.0))
    return out if out.ndim else float(out)


def upsilon_area(eps: float, c: float) -> float:
    """Exact area of ``Upsilon(eps) = {|x1 x2| <= eps, |x_i| <= c}``."""
    if eps < 0:
        raise InvalidParameterError(f"eps must be >= 0, got {eps!r}")
    if not 0 < c < 1:
        raise InvalidParameterError(f"require 0 < c < 1, got c={c!r}")
    return float(hyperbolic_area(eps, c))
