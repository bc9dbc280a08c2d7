"""Siegel transforms of box indicators along the family ``a(n) Lambda_alpha``.

The measure on ``Y`` is the pushforward of Lebesgue measure on ``[0, 1)^2``
under ``alpha -> Lambda_alpha``; Monte Carlo estimates draw ``alpha`` from the
seeded streams in :mod:`multclt.sampling`.
"""
from __future__ import annotations

import csv
import math
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .core import InvalidParameterError
from .lattice import (
    DEFAULT_BUDGET,
    EnumerationBudgetError,
    FlowExponent,
    UnimodularLattice,
    _box_arrays,
    count_in_box,
    heights_flowed,
)
from .sampling import torus_samples


class Estimate(NamedTuple):
    value: float
    stderr: float


def siegel_transform(box, L: UnimodularLattice, budget: int = DEFAULT_BUDGET) -> int:
    """Number of nonzero points of ``L`` in the closed box ``(lo, hi)``."""
    lo, hi = box
    return count_in_box(L, lo, hi, budget)


def flowed_counts(box, n, alphas: np.ndarray, budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Siegel transform of the box at ``a(n) Lambda_alpha`` for each row of ``alphas``."""
    lo, hi = _box_arrays(*box)
    e1, e2, e3 = FlowExponent(*n).scales()
    alphas = np.ascontiguousarray(alphas, dtype=float)
    out = _kernels.siegel_counts_batch(
        alphas[:, 0].copy(), alphas[:, 1].copy(), e1, e2, e3, lo, hi, budget
    )
    if np.any(out < 0):
        raise EnumerationBudgetError(f"box enumeration exceeded {budget} candidates")
    return out


def _mean_se(values: np.ndarray) -> Estimate:
    values = np.asarray(values, dtype=float)
    n = values.size
    sd = float(np.std(values, ddof=1)) if n > 1 else 0.0
    return Estimate(float(np.mean(values)), sd / math.sqrt(n))


def _check_samples(samples):
    if int(samples) != samples or samples < 100:
        raise InvalidParameterError(f"need at least 100 samples, got {samples!r}")


def _check_forward(n):
    n = FlowExponent(*n)
    if n.t1 < 0 or n.t2 < 0:
        raise InvalidParameterError(f"flow exponent must be nonnegative, got {n!r}")
    return n


def y_expectation_exact(box, n) -> float:
    """Exact ``int_Y chi_box^ o a(n) dnu``.

    Unfolding the torus integral leaves ``e^{-s} sum_q area(x-section)`` over the
    integers ``q`` whose flowed height ``e^{-s} q`` lies in the box.
    """
    lo, hi = _box_arrays(*box)
    if not lo[2] > 0:
        raise InvalidParameterError("box y-range must lie in (0, inf)")
    n = _check_forward(n)
    *_, e3 = n.scales()
    q_lo = math.ceil(lo[2] / e3) - 1
    q_hi = math.floor(hi[2] / e3) + 1
    n_q = sum(1 for q in range(max(q_lo, 1), q_hi + 1) if lo[2] <= e3 * q <= hi[2])
    return e3 * n_q * (hi[0] - lo[0]) * (hi[1] - lo[1])


def y_expectation_mc(box, n, samples: int, seed: int, budget: int = DEFAULT_BUDGET) -> Estimate:
    _check_samples(samples)
    n = _check_forward(n)
    return _mean_se(flowed_counts(box, n, torus_samples(samples, seed), budget))


def second_moment_y(box, n, samples: int, seed: int, budget: int = DEFAULT_BUDGET) -> Estimate:
    """Monte Carlo ``int_Y (chi_box^)^2 o a(n) dnu``."""
    _check_samples(samples)
    n = _check_forward(n)
    lo, hi = _box_arrays(*box)
    if not (0 < lo[2] < hi[2]):
        raise InvalidParameterError("second moment needs a box [-c,c]^2 x [xi, beta] with 0 < xi < beta")
    counts = flowed_counts(box, n, torus_samples(samples, seed), budget).astype(float)
    return _mean_se(counts**2)


def second_moment_envelope(box, n) -> float:
    """``beta max(1, ln(beta/xi))^2 max(1, |n| e^{-min n})``, the shape of the second-moment bound."""
    lo, hi = _box_arrays(*box)
    xi, beta = lo[2], hi[2]
    n = FlowExponent(*n)
    return beta * max(1.0, math.log(beta / xi)) ** 2 * max(1.0, max(n) * math.exp(-min(n)))


def height_tail(n, L_grid: Sequence[float], samples: int, seed: int,
                budget: int = DEFAULT_BUDGET) -> list[tuple[float, float]]:
    """Empirical ``nu(ht o a(n) >= L)`` for each ``L`` in the grid."""
    _check_samples(samples)
    n = _check_forward(n)
    L_grid = [float(L) for L in L_grid]
    if any(L <= 1 for L in L_grid) or any(b <= a for a, b in zip(L_grid, L_grid[1:])):
        raise InvalidParameterError("L_grid must be increasing with every L > 1")
    h = heights_flowed(torus_samples(samples, seed), n, budget)
    return [(L, float(np.count_nonzero(h >= L)) / samples) for L in L_grid]


def loglog_slope(L_values, fractions) -> float:
    """Least-squares slope of ``log fraction`` against ``log L``."""
    x = np.log(np.asarray(L_values, dtype=float))
    fractions = np.asarray(fractions, dtype=float)
    if not np.all(fractions > 0):
        raise ValueError("fractions must be positive to fit a log-log slope")
    y = np.log(fractions)
    return float(np.polyfit(x, y, 1)[0])


def decorrelation_probe(box, t_a, t_b, samples: int, seed: int,
                        budget: int = DEFAULT_BUDGET) -> Estimate:
    """Sample covariance over ``alpha`` of the transforms at ``a(t_a)`` and ``a(t_b)``.

    The standard error is that of the mean of the centred products.
    """
    _check_samples(samples)
    t_a, t_b = _check_forward(t_a), _check_forward(t_b)
    alphas = torus_samples(samples, seed)
    u = flowed_counts(box, t_a, alphas, budget).astype(float)
    v = u if t_a == t_b else flowed_counts(box, t_b, alphas, budget).astype(float)
    w = (u - u.mean()) * (v - v.mean())
    cov = float(w.sum() / (samples - 1))
    se = float(np.std(w, ddof=1)) / math.sqrt(samples)
    return Estimate(cov, se)


def write_probe_csv(path, rows) -> None:
    """Rows of ``(grid point, estimate, stderr)``; the grid point is written as given."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["grid_point", "estimate", "stderr"])
        for point, est, se in rows:
            w.writerow([point, repr(float(est)), repr(float(se))])
