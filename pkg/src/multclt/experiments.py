"""Monte Carlo CLT experiment for the normalized discrepancy, plus its statistics and I/O."""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .core import DomainParams, InvalidParameterError
from .counting import count_products_many, count_small_products_many, discrepancy_from_count
from .sampling import generator, torus_samples
from .volumes import SeriesConfig, Variant, sigma_squared, vol_omega_exact, vol_theta

SERIES_CUTOFF = 200
BOOTSTRAP_ROUNDS = 200


class HypothesisWarning(UserWarning):
    """Parameters fall outside the regime in which the limit theorem is stated."""


@dataclass(frozen=True)
class ExperimentConfig:
    params: DomainParams
    samples: int = 2000
    seed: int = 0
    sigma_variant: Variant = Variant.THEOREM_ALL_PAIRS
    T_grid: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "sigma_variant", Variant.parse(self.sigma_variant))
        if int(self.samples) != self.samples or self.samples < 100:
            raise InvalidParameterError(f"samples must be an integer >= 100, got {self.samples!r}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise InvalidParameterError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if self.T_grid is not None:
            grid = tuple(float(T) for T in self.T_grid)
            if any(T <= 1 for T in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
                raise InvalidParameterError("T_grid must be strictly increasing with T > 1")
            object.__setattr__(self, "T_grid", grid)
        for msg in hypothesis_violations(self.params):
            warnings.warn(msg, HypothesisWarning, stacklevel=3)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {"a", "b", "c", "T", "samples", "seed", "sigma_variant", "T_grid"}
        unknown = set(d) - known
        if unknown:
            raise InvalidParameterError(f"unknown config keys: {sorted(unknown)}")
        try:
            params = DomainParams(float(d.get("a", 0.0)), float(d["b"]), float(d.get("c", 0.5)), float(d["T"]))
        except KeyError as exc:
            raise InvalidParameterError(f"missing config key {exc.args[0]!r}") from None
        grid = d.get("T_grid")
        return cls(
            params,
            samples=int(d.get("samples", 2000)),
            seed=int(d.get("seed", 0)),
            sigma_variant=d.get("sigma_variant", Variant.THEOREM_ALL_PAIRS),
            T_grid=tuple(grid) if grid else None,
        )

    def to_dict(self) -> dict:
        out = self.params.as_dict()
        out.update(samples=self.samples, seed=self.seed, sigma_variant=self.sigma_variant.value,
                   T_grid=list(self.T_grid) if self.T_grid else None)
        return out


def hypothesis_violations(p: DomainParams) -> list[str]:
    """Human-readable notes on where ``p`` leaves the limit theorem's parameter regime."""
    notes = []
    if p.T <= math.e:
        return [f"T={p.T:g} <= e: logarithmic rate conditions are undefined"]
    lnT = math.log(p.T)
    if p.b < lnT ** (-6 / 5):
        notes.append(f"b={p.b:g} below (ln T)^(-6/5)={lnT ** (-6 / 5):g}")
    if p.a > 0:
        lnlnT = math.log(lnT) if lnT > 1 else 0.0
        if lnlnT <= 0 or p.a > p.b * lnlnT ** -4:
            notes.append(f"a={p.a:g} exceeds b (ln ln T)^(-4)")
    return notes


class SampleRecord(NamedTuple):
    seed_index: int
    x1: float
    x2: float
    count: int
    discrepancy: float


class SummaryStats(NamedTuple):
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    ks_distance: float
    n: int


# -- statistics ------------------------------------------------------------------

def empirical_cumulants(values: Sequence[float], max_order: int = 4) -> list[float]:
    """Plug-in cumulants ``[k2, ..., k_max]`` from central sample moments."""
    if max_order not in (2, 3, 4):
        raise InvalidParameterError("max_order must be 2, 3 or 4")
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise InvalidParameterError("need at least two values")
    if np.ptp(v) == 0:
        # a constant sample; avoid the rounding residue of v - mean
        return [0.0] * (max_order - 1)
    d = v - v.mean()
    m2 = float(np.mean(d**2))
    out = [m2]
    if max_order >= 3:
        out.append(float(np.mean(d**3)))
    if max_order >= 4:
        out.append(float(np.mean(d**4)) - 3.0 * m2 * m2)
    return out


def normalized_cumulants(values) -> tuple[float, float]:
    """``(k3 / k2^1.5, k4 / k2^2)``; zeros for a degenerate sample."""
    k2, k3, k4 = empirical_cumulants(values, 4)
    if k2 <= 0:
        return 0.0, 0.0
    return k3 / k2**1.5, k4 / k2**2


def normal_cdf(xi: float, sigma2: float) -> float:
    if not sigma2 > 0:
        raise InvalidParameterError(f"variance must be positive, got {sigma2!r}")
    return 0.5 * math.erfc(-xi / math.sqrt(2.0 * sigma2))


def ks_distance(values: Sequence[float], cdf: Callable[[float], float]) -> float:
    """Sup distance between the empirical distribution of ``values`` and ``cdf``."""
    v = np.sort(np.asarray(values, dtype=float))
    n = v.size
    if n == 0:
        raise InvalidParameterError("values must be nonempty")
    u = np.unique(v)
    below = np.searchsorted(v, u, side="left") / n
    upto = np.searchsorted(v, u, side="right") / n
    F = np.array([cdf(float(x)) for x in u])
    return float(max(np.max(np.abs(below - F)), np.max(np.abs(upto - F))))


def ks_normal(values, sigma2: float) -> float:
    return ks_distance(values, lambda x: normal_cdf(x, sigma2))


def bootstrap_skewness_se(values, seed: int, rounds: int = BOOTSTRAP_ROUNDS) -> float:
    v = np.asarray(values, dtype=float)
    rng = generator(seed, stream=1)
    idx = rng.integers(0, v.size, size=(rounds, v.size))
    skews = [normalized_cumulants(v[row])[0] for row in idx]
    return float(np.std(skews, ddof=1))


def summarize(values, sigma2: float) -> SummaryStats:
    v = np.asarray(values, dtype=float)
    k2 = empirical_cumulants(v, 2)[0]
    skew, kurt = normalized_cumulants(v)
    return SummaryStats(float(v.mean()), k2, skew, kurt, ks_normal(v, sigma2), int(v.size))


def sigma2_values(pq_cutoff: int = SERIES_CUTOFF) -> dict[Variant, float]:
    return {v: sigma_squared(SeriesConfig(pq_cutoff, 10, v)).value for v in Variant}


def variant_report(discrepancies) -> dict:
    """KS distance and variance gap against each variance variant, and the closest one."""
    d = np.asarray(discrepancies, dtype=float)
    var = empirical_cumulants(d, 2)[0]
    rows = {}
    for v, s2 in sigma2_values().items():
        rows[v.value] = {"sigma2": s2, "abs_gap": abs(var - s2), "ks": ks_normal(d, s2)}
    closest = min(rows, key=lambda k: rows[k]["abs_gap"])
    best_ks = min(rows, key=lambda k: rows[k]["ks"])
    return {"variance": var, "variants": rows, "closest_variance": closest, "best_ks": best_ks}


# -- runs --------------------------------------------------------------------------

def run_clt(cfg: ExperimentConfig) -> tuple[list[SampleRecord], SummaryStats]:
    """Sample ``x`` uniformly, count, normalize, and summarize against ``N(0, sigma^2)``."""
    xs = torus_samples(cfg.samples, cfg.seed)
    counts = count_products_many(xs, cfg.params)
    vol = vol_omega_exact(cfg.params)
    D = discrepancy_from_count(counts, vol)
    records = [
        SampleRecord(i, float(xs[i, 0]), float(xs[i, 1]), int(counts[i]), float(D[i]))
        for i in range(cfg.samples)
    ]
    sigma2 = sigma2_values()[cfg.sigma_variant]
    return records, summarize(D, sigma2)


class TrendRow(NamedTuple):
    T: float
    vol: float
    mean: float
    var_ratio: float
    skewness: float
    skewness_se: float
    excess_kurtosis: float
    ks: dict


def cumulant_trend(cfg: ExperimentConfig) -> list[TrendRow]:
    """Normalized cumulants and KS distances of the discrepancy for each ``T`` in ``cfg.T_grid``.

    All ``T`` share the same sample points; counts come from one pass over ``q``.
    """
    if not cfg.T_grid or len(cfg.T_grid) < 3:
        raise InvalidParameterError("cumulant_trend needs a T_grid with at least 3 values")
    xs = torus_samples(cfg.samples, cfg.seed)
    counts = count_products_many(xs, cfg.params, cfg.T_grid)
    sig = sigma2_values()
    rows = []
    for j, T in enumerate(cfg.T_grid):
        p = DomainParams(cfg.params.a, cfg.params.b, cfg.params.c, T)
        vol = vol_omega_exact(p)
        D = discrepancy_from_count(counts[:, j], vol)
        skew, kurt = normalized_cumulants(D)
        rows.append(TrendRow(
            T, vol, float(D.mean()), empirical_cumulants(D, 2)[0], skew,
            bootstrap_skewness_se(D, cfg.seed), kurt,
            {v.value: ks_normal(D, s2) for v, s2 in sig.items()},
        ))
    return rows


class SmallProductsRow(NamedTuple):
    T: float
    mean: float
    max: int
    volume: float


def small_products_study(K: float, T_grid: Sequence[float], samples: int, seed: int,
                         c: float = 0.5) -> list[SmallProductsRow]:
    """Mean and max of ``|Theta_T cap Lambda_x|`` over random ``x`` for each ``T``."""
    if not K > 2:
        raise InvalidParameterError(f"need K > 2, got {K!r}")
    xs = torus_samples(samples, seed)
    rows = []
    for T in T_grid:
        counts = count_small_products_many(xs, K, float(T), c)
        rows.append(SmallProductsRow(float(T), float(counts.mean()), int(counts.max()), vol_theta(K, T, c)))
    return rows


# -- persistence ---------------------------------------------------------------------

def write_records_jsonl(path, records: Sequence[SampleRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            fh.write(json.dumps(r._asdict()) + "\n")


def read_records_jsonl(path) -> list[SampleRecord]:
    with open(path, encoding="utf-8") as fh:
        return [SampleRecord(**json.loads(line)) for line in fh if line.strip()]


def write_summary_csv(path, summary: SummaryStats, extra: dict | None = None) -> None:
    row = summary._asdict()
    row.update(extra or {})
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(row))
        w.writeheader()
        w.writerow(row)


def write_trend_csv(path, rows: Sequence[TrendRow]) -> None:
    variants = [v.value for v in Variant]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["T", "vol", "mean", "var_ratio", "skewness", "skewness_se", "excess_kurtosis"]
                   + [f"ks_{v}" for v in variants])
        for r in rows:
            w.writerow([repr(r.T), repr(r.vol), repr(r.mean), repr(r.var_ratio), repr(r.skewness),
                        repr(r.skewness_se), repr(r.excess_kurtosis)] + [repr(r.ks[v]) for v in variants])


def histogram_svg(values, sigma2: float | None = None, bins="fd",
                  width: int = 640, height: int = 400) -> str:
    """A self-contained SVG histogram (density scale) with an optional normal density overlay."""
    v = np.asarray(values, dtype=float)
    if np.ptp(v) == 0:
        edges = np.array([v[0] - 0.5, v[0] + 0.5])
    else:
        edges = np.histogram_bin_edges(v, bins=bins)
    dens, edges = np.histogram(v, bins=edges, density=True)
    pad = 40
    x0, x1 = float(edges[0]), float(edges[-1])
    grid = np.linspace(x0, x1, 200)
    curve = None
    if sigma2:
        curve = np.exp(-grid**2 / (2 * sigma2)) / math.sqrt(2 * math.pi * sigma2)
    ymax = max(float(dens.max()), float(curve.max()) if curve is not None else 0.0) or 1.0
    sx = lambda x: pad + (x - x0) / (x1 - x0) * (width - 2 * pad)
    sy = lambda y: height - pad - y / ymax * (height - 2 * pad)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    for h, a, b in zip(dens, edges[:-1], edges[1:]):
        parts.append(
            f'<rect x="{sx(a):.2f}" y="{sy(h):.2f}" width="{sx(b) - sx(a):.2f}" '
            f'height="{sy(0) - sy(h):.2f}" fill="#8fb3d9" stroke="#35618f" stroke-width="0.5"/>'
        )
    if curve is not None:
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(grid, curve))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="#c0392b" stroke-width="2"/>')
    parts.append(f'<line x1="{pad}" y1="{sy(0):.2f}" x2="{width - pad}" y2="{sy(0):.2f}" stroke="black"/>')
    parts.append(f'<text x="{pad}" y="{height - 10}" font-size="12">{x0:.3g}</text>')
    parts.append(f'<text x="{width - pad}" y="{height - 10}" font-size="12" text-anchor="end">{x1:.3g}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
