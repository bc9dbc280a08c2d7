"""Volumes of ``Omega`` and the variance series built from ``V_{p,q}(m)``.

The closed forms used here:

* ``G(s)``, the area of ``{|x1 x2| <= s, |x_i| <= c}``, is
  ``4(s + s ln(c^2/s))`` below ``c^2`` and ``4c^2`` above, so
  ``Vol(Omega) = int_1^T G(b/y) - G(a/y) dy`` integrates in elementary terms.
* ``V_{p,q}(m) = max(p,q)^-3 * prod_i 2 max(0, 1 - |m_i - ln(p/q)|)``: the y-section
  of the intersection has length ``max(p,q)^-3 / |x1 x2|`` and each coordinate
  contributes the log-length of the overlap of two e-adic shells.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import zeta

from .core import DomainParams, InvalidParameterError

ZETA2 = float(zeta(2.0))
ZETA3 = float(zeta(3.0))
ZETA32 = float(zeta(1.5))


# -- volumes of Omega ----------------------------------------------------------

def _hyperbolic_integral(s: float, c: float, T: float) -> float:
    """``int_1^T G(s/y) dy``."""
    if s <= 0 or T <= 1:
        return 0.0
    c2 = c * c
    y0 = s / c2  # below y0 the product bound is vacuous
    flat = 4.0 * c2 * (min(max(y0, 1.0), T) - 1.0)
    y_lo = max(1.0, y0)
    if T <= y_lo:
        return flat
    ls = math.log(c2) - math.log(s)
    u_lo = math.log(y_lo) + ls
    u_hi = math.log(T) + ls
    curved = 4.0 * s * ((u_hi - u_lo) + 0.5 * (u_hi * u_hi - u_lo * u_lo))
    return flat + curved


def vol_omega_exact(p: DomainParams) -> float:
    return _hyperbolic_integral(p.b, p.c, p.T) - _hyperbolic_integral(p.a, p.c, p.T)


def vol_theta(K: float, T: float, c: float) -> float:
    """Volume of the small-products set ``Theta_T``."""
    return _hyperbolic_integral(math.log(T) ** (-K), c, T)


def vol_omega_paper_asymptotic(p: DomainParams) -> float:
    """Main terms ``2 L^2 (b-a) + 4 L ((b-a) + b ln(c^2/b) - a ln(c^2/a))`` with ``L = ln T``."""
    if not p.a > 0:
        raise InvalidParameterError("the asymptotic formula needs a > 0")
    L = math.log(p.T)
    c2 = p.c * p.c
    diff = p.b - p.a
    return 2 * L * L * diff + 4 * L * (diff + p.b * (math.log(c2) - math.log(p.b)) - p.a * (math.log(c2) - math.log(p.a)))


# -- series terms ----------------------------------------------------------------

class SeriesTerm(NamedTuple):
    p: int
    q: int
    m1: int
    m2: int
    value: float


def _shell_overlap(m, log_ratio):
    # log-length of (m - ln p + ln c - 1, m - ln p + ln c] meeting (-ln q + ln c - 1, -ln q + ln c]
    return np.maximum(0.0, 1.0 - np.abs(m - log_ratio))


def _check_pq(p, q):
    if int(p) != p or int(q) != q or p < 1 or q < 1:
        raise InvalidParameterError(f"p and q must be positive integers, got {p!r}, {q!r}")


def v_pq_m(p: int, q: int, m1: int, m2: int) -> float:
    """``Vol(p^-1 a(m) Delta_c cap q^-1 Delta_c)``; independent of ``c``."""
    _check_pq(p, q)
    u = math.log(p / q)
    w1 = 2.0 * float(_shell_overlap(m1, u))
    w2 = 2.0 * float(_shell_overlap(m2, u))
    return w1 * w2 / max(p, q) ** 3


def _m_mass(log_ratio, m_cutoff: int):
    """``sum_{|m| <= M} 2 max(0, 1 - |m - u|)`` for array ``u``."""
    m = np.arange(-m_cutoff, m_cutoff + 1, dtype=float)
    u = np.asarray(log_ratio, dtype=float)[..., None]
    return 2.0 * _shell_overlap(m, u).sum(axis=-1)


def v_pq_inf(p: int, q: int, m_cutoff: int = 10) -> float:
    """``sum_{|m1|,|m2| <= M} V_{p,q}(m)``, i.e. ``Vol(p^-1 Delta_inf cap q^-1 Delta_c)`` once ``M`` covers the support."""
    _check_pq(p, q)
    if m_cutoff < 1:
        raise InvalidParameterError("m_cutoff must be >= 1")
    w = float(_m_mass(math.log(p / q), m_cutoff))
    return w * w / max(p, q) ** 3


def nonzero_terms(p: int, q: int, m_cutoff: int) -> list[SeriesTerm]:
    """The (at most four) nonzero ``V_{p,q}(m)`` with ``|m_i| <= m_cutoff``."""
    u = math.log(p / q)
    ms = [m for m in range(math.floor(u), math.floor(u) + 2) if abs(m) <= m_cutoff and abs(m - u) < 1]
    terms = []
    for m1 in ms:
        for m2 in ms:
            v = v_pq_m(p, q, m1, m2)
            if v > 0:
                terms.append(SeriesTerm(p, q, m1, m2, v))
    return terms


# -- variance series -------------------------------------------------------------

class Variant(str, enum.Enum):
    THEOREM_ALL_PAIRS = "theorem_all_pairs"
    PROPOSITION_ZETA_WEIGHTED = "proposition_zeta_weighted"
    COPRIME_PAIRS = "coprime_pairs"

    @classmethod
    def parse(cls, name) -> "Variant":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower()
        aliases = {
            "all_pairs": cls.THEOREM_ALL_PAIRS,
            "theorem": cls.THEOREM_ALL_PAIRS,
            "zeta_weighted": cls.PROPOSITION_ZETA_WEIGHTED,
            "proposition": cls.PROPOSITION_ZETA_WEIGHTED,
            "coprime": cls.COPRIME_PAIRS,
        }
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise InvalidParameterError(f"unknown variance variant {name!r}") from None


@dataclass(frozen=True)
class SeriesConfig:
    pq_cutoff: int = 200
    m_cutoff: int = 10
    variant: Variant = Variant.THEOREM_ALL_PAIRS

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        if self.pq_cutoff < 1 or self.m_cutoff < 1:
            raise InvalidParameterError("cutoffs must be >= 1")
        if self.m_cutoff < math.log(self.pq_cutoff) + 1:
            raise InvalidParameterError(
                f"m_cutoff={self.m_cutoff} does not cover the support of V_(p,q)(m) "
                f"for p, q <= {self.pq_cutoff}; need m_cutoff >= ln(pq_cutoff) + 1"
            )


class SeriesResult(NamedTuple):
    """``value`` estimates the full series; ``partial`` is the truncated sum.

    ``tail_bound`` is a rigorous upper bound on ``value - partial``.
    """

    value: float
    tail_bound: float
    partial: float


def _pair_grid(N: int):
    p = np.arange(1, N + 1)
    return np.meshgrid(p, p, indexing="ij")


def series_partial(cfg: SeriesConfig) -> float:
    """``sum_{p,q <= N} sum_{|m| <= M} V_{p,q}(m)`` with the variant's pair filter and weight."""
    P, Q = _pair_grid(cfg.pq_cutoff)
    w = _m_mass(np.log(P / Q), cfg.m_cutoff)
    terms = w * w / np.maximum(P, Q).astype(float) ** 3
    if cfg.variant is Variant.COPRIME_PAIRS:
        terms = terms[np.gcd(P, Q) == 1]
    total = math.fsum(terms.ravel())
    if cfg.variant is Variant.PROPOSITION_ZETA_WEIGHTED:
        total /= ZETA3
    return total


def _mobius(N: int) -> np.ndarray:
    mu = np.ones(N + 1, dtype=np.int64)
    mu[0] = 0
    is_prime = np.ones(N + 1, dtype=bool)
    is_prime[:2] = False
    for k in range(2, N + 1):
        if is_prime[k]:
            is_prime[2 * k::k] = False
            mu[k::k] *= -1
            mu[k * k::k * k] = 0
    return mu


def series_remainder(N: int, variant: Variant) -> float:
    """Exact sum over ``max(p, q) > N`` of the m-summed terms ``4 max(p,q)^-3``.

    Pairs with ``max(p, q) = n`` number ``2n - 1`` (``2 phi(n)`` coprime ones),
    so the remainder is a Hurwitz-zeta expression; the coprime case goes
    through ``phi(n) = sum_{d|n} mu(d) n/d``.
    """
    variant = Variant.parse(variant)
    if variant is Variant.COPRIME_PAIRS:
        mu = _mobius(N)
        d = np.arange(1, N + 1)
        head = math.fsum(mu[1:] / d**3.0 * zeta(2.0, N // d + 1))
        mu_tail = 1.0 / ZETA3 - math.fsum(mu[1:] / d**3.0)
        phi_tail = head + ZETA2 * mu_tail
        return 8.0 * phi_tail
    rem = 4.0 * (2.0 * float(zeta(2.0, N + 1)) - float(zeta(3.0, N + 1)))
    if variant is Variant.PROPOSITION_ZETA_WEIGHTED:
        rem /= ZETA3
    return rem


def decay_constant(N: int) -> float:
    """Twice the largest ratio of an m-summed term to ``(pq)^{-3/2}`` over ``p, q <= N``."""
    P, Q = _pair_grid(N)
    w = _m_mass(np.log(P / Q), max(10, math.ceil(math.log(N)) + 2))
    terms = w * w / np.maximum(P, Q).astype(float) ** 3
    return 2.0 * float(np.max(terms * (P * Q).astype(float) ** 1.5))


def sigma_squared(cfg: SeriesConfig) -> SeriesResult:
    """Variance constant for the chosen variant.

    ``partial`` sums the oracle-checked terms; ``value`` adds the exact
    remainder beyond ``pq_cutoff``; ``tail_bound`` dominates the remainder by
    comparison with ``C (pq)^{-3/2}``.
    """
    N = cfg.pq_cutoff
    partial = series_partial(cfg)
    rem = series_remainder(N, cfg.variant)
    harm = math.fsum(np.arange(1, N + 1, dtype=float) ** -1.5)
    tail = decay_constant(N) * (ZETA32**2 - harm**2)
    if cfg.variant is Variant.PROPOSITION_ZETA_WEIGHTED:
        tail /= ZETA3
    return SeriesResult(partial + rem, tail, partial)


def sigma_squared_all(pq_cutoff: int = 200, m_cutoff: int = 10) -> dict[str, float]:
    return {
        v.value: sigma_squared(SeriesConfig(pq_cutoff, m_cutoff, v)).value for v in Variant
    }


def write_series_csv(path, cfg: SeriesConfig) -> int:
    """Dump every nonzero term as ``p,q,m1,m2,value`` rows; returns the row count."""
    rows = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "q", "m1", "m2", "value"])
        for p in range(1, cfg.pq_cutoff + 1):
            for q in range(1, cfg.pq_cutoff + 1):
                if cfg.variant is Variant.COPRIME_PAIRS and math.gcd(p, q) != 1:
                    continue
                for t in nonzero_terms(p, q, cfg.m_cutoff):
                    w.writerow([t.p, t.q, t.m1, t.m2, repr(t.value)])
                    rows += 1
    return rows


# -- Rogers second moment ------------------------------------------------------------

class Box(NamedTuple):
    lo: tuple
    hi: tuple


def _parse_boxes(spec) -> list[Box]:
    """Accept a single ``(lo, hi)`` pair or an iterable of them."""
    try:
        items = list(spec)
        if len(items) == 2 and np.ndim(items[0]) == 1 and len(items[0]) == 3:
            items = [items]
        boxes = []
        for lo, hi in items:
            lo = tuple(float(v) for v in lo)
            hi = tuple(float(v) for v in hi)
            if len(lo) != 3 or len(hi) != 3:
                raise ValueError
            if any(a > b for a, b in zip(lo, hi)) or not all(map(math.isfinite, lo + hi)):
                raise ValueError
            boxes.append(Box(lo, hi))
    except (TypeError, ValueError):
        raise InvalidParameterError(
            "region must be a finite list of axis-aligned boxes (lo, hi) in R^3"
        ) from None
    return boxes


def _overlap(a_lo, a_hi, b_lo, b_hi):
    return np.maximum(0.0, np.minimum(a_hi, b_hi) - np.maximum(a_lo, b_lo))


def rogers_rhs(f_spec, g_spec, pq_cutoff: int = 1000) -> float:
    """Right-hand side of Rogers' second-moment formula for sums of box indicators.

    ``f`` and ``g`` are the sums of the indicators of the given boxes; the
    dilation series is truncated at ``p, q <= pq_cutoff``.
    """
    fb, gb = _parse_boxes(f_spec), _parse_boxes(g_spec)
    vol = lambda bs: math.fsum(math.prod(h - l for l, h in zip(b.lo, b.hi)) for b in bs)
    inv = 1.0 / np.arange(1, pq_cutoff + 1, dtype=float)
    P, Q = inv[:, None], inv[None, :]
    cross = np.zeros((pq_cutoff, pq_cutoff))
    for f in fb:
        for g in gb:
            same = np.ones_like(cross)
            flip = np.ones_like(cross)
            for i in range(3):
                same = same * _overlap(f.lo[i] * P, f.hi[i] * P, g.lo[i] * Q, g.hi[i] * Q)
                flip = flip * _overlap(f.lo[i] * P, f.hi[i] * P, -g.hi[i] * Q, -g.lo[i] * Q)
            cross += same + flip
    return vol(fb) * vol(gb) + math.fsum(cross.ravel()) / ZETA3

