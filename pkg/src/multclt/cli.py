"""``multclt`` command-line interface.

Exit codes: 0 success, 1 the ``--lattice`` cross-check disagreed, 2 invalid
parameters or configuration, 3 enumeration budget exceeded, 4 I/O error.
Artifacts are only written inside ``--out``.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from .core import DomainParams, InvalidParameterError

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INVALID = 2
EXIT_BUDGET = 3
EXIT_IO = 4


class ConfigError(InvalidParameterError):
    pass


# -- helpers ----------------------------------------------------------------------

def _load_config(path) -> dict:
    if path is None:
        return {}
    with open(path, encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: expected a JSON object with flat keys")
    return cfg


def _resolve(args, keys, defaults) -> dict:
    """Defaults, then the config file, then explicit command-line flags."""
    cfg = dict(defaults)
    cfg.update(_load_config(getattr(args, "config", None)))
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    return cfg


def _out_dir(args) -> Path | None:
    if getattr(args, "out", None) is None:
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _echo_config(cfg: dict, out: Path | None, command: str) -> None:
    resolved = {"command": command, **cfg}
    print("config: " + json.dumps(resolved, sort_keys=True))
    if out is not None:
        with open(out / "config.json", "w", encoding="utf-8") as fh:
            json.dump(resolved, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _params(cfg: dict) -> DomainParams:
    try:
        return DomainParams(float(cfg["a"]), float(cfg["b"]), float(cfg["c"]), float(cfg["T"]))
    except KeyError as exc:
        raise ConfigError(f"missing parameter {exc.args[0]!r}") from None


def _set_threads(requested) -> int:
    import numba

    if requested is None:
        env = os.environ.get("MULTCLT_THREADS")
        if env:
            try:
                requested = int(env)
            except ValueError:
                raise ConfigError(f"MULTCLT_THREADS must be an integer, got {env!r}") from None
    available = numba.config.NUMBA_NUM_THREADS
    n = available if requested is None else int(requested)
    if n < 1:
        raise ConfigError(f"thread count must be positive, got {n}")
    n = min(n, available)
    numba.set_num_threads(n)
    return n


def _parse_box(text: str):
    vals = [float(v) for v in text.split(",")]
    if len(vals) != 6:
        raise ConfigError("a box is six comma-separated numbers: x1lo,x1hi,x2lo,x2hi,ylo,yhi")
    return (vals[0], vals[2], vals[4]), (vals[1], vals[3], vals[5])


# -- commands ---------------------------------------------------------------------

def cmd_count(args) -> int:
    from .counting import count_products, count_via_lattice, MAX_LATTICE_T

    cfg = {"x1": args.x1, "x2": args.x2, "a": args.a, "b": args.b, "c": args.c, "T": args.T,
           "lattice": bool(args.lattice)}
    p = _params(cfg)
    out = _out_dir(args)
    if out is not None:
        _echo_config(cfg, out, "count")
    n = count_products(args.x1, args.x2, p)
    if not args.lattice:
        print(n)
        return EXIT_OK
    if p.T > MAX_LATTICE_T:
        raise InvalidParameterError(f"--lattice needs T <= {MAX_LATTICE_T:g}")
    m = count_via_lattice(args.x1, args.x2, p)
    print(f"direct {n}")
    print(f"lattice {m}")
    print("MATCH" if n == m else "MISMATCH")
    return EXIT_OK if n == m else EXIT_MISMATCH


def cmd_volume(args) -> int:
    from .volumes import vol_omega_exact, vol_omega_paper_asymptotic

    cfg = _resolve(args, ("a", "b", "c", "T"), {"a": 0.0, "c": 0.5})
    out = _out_dir(args)
    _echo_config(cfg, out, "volume")
    if "b" in cfg and "T" in cfg and float(cfg["a"]) == float(cfg["b"]):
        # an empty product window; the other parameters must still be admissible
        _params({**cfg, "a": 0.0, "b": 0.5})
        vol, asym = 0.0, None
    else:
        p = _params(cfg)
        vol = vol_omega_exact(p)
        asym = vol_omega_paper_asymptotic(p) if p.a > 0 else None
    print(vol if asym is None else f"{vol} asymptotic {asym}")
    if out is not None:
        with open(out / "volume.csv", "w", encoding="utf-8", newline="") as fh:
            fh.write("vol_exact,vol_asymptotic\n")
            fh.write(f"{vol!r},{'' if asym is None else repr(asym)}\n")
    return EXIT_OK


def cmd_variance(args) -> int:
    from .volumes import SeriesConfig, sigma_squared, write_series_csv

    cfg = _resolve(args, ("pq_cutoff", "m_cutoff", "variant"),
                   {"pq_cutoff": 200, "m_cutoff": 10, "variant": "theorem_all_pairs"})
    sc = SeriesConfig(int(cfg["pq_cutoff"]), int(cfg["m_cutoff"]), cfg["variant"])
    cfg["variant"] = sc.variant.value
    out = _out_dir(args)
    _echo_config(cfg, out, "variance")
    res = sigma_squared(sc)
    print(f"sigma2 {res.value!r} tail_bound {res.tail_bound!r} partial {res.partial!r}")
    if out is not None:
        write_series_csv(out / "series.csv", sc)
    return EXIT_OK


def cmd_clt(args) -> int:
    from .experiments import (
        ExperimentConfig, cumulant_trend, histogram_svg, run_clt, sigma2_values,
        variant_report, write_records_jsonl, write_summary_csv, write_trend_csv,
    )
    from .volumes import vol_omega_exact

    cfg = _resolve(args, ("a", "b", "c", "T", "samples", "seed", "sigma_variant", "T_grid"),
                   {"a": 0.0, "c": 0.5, "samples": 2000, "seed": 0,
                    "sigma_variant": "theorem_all_pairs", "T_grid": None})
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ec = ExperimentConfig.from_dict(cfg)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    resolved = ec.to_dict()
    resolved["bins"] = args.bins
    out = _out_dir(args)
    _echo_config(resolved, out, "clt")
    records, summary = run_clt(ec)
    D = np.array([r.discrepancy for r in records])
    report = variant_report(D)
    s2 = sigma2_values()[ec.sigma_variant]
    if out is not None:
        write_records_jsonl(out / "records.jsonl", records)
        write_summary_csv(out / "summary.csv", summary, {
            "vol": vol_omega_exact(ec.params), "sigma2": s2, "sigma_variant": ec.sigma_variant.value,
            "closest_variance": report["closest_variance"], "best_ks": report["best_ks"],
        })
        bins = args.bins if args.bins is None or not args.bins.isdigit() else int(args.bins)
        (out / "hist.svg").write_text(histogram_svg(D, s2, bins=bins or "fd"), encoding="utf-8")
        with open(out / "report.json", "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
        if ec.T_grid:
            write_trend_csv(out / "trend.csv", cumulant_trend(ec))
    print(f"n {summary.n} mean {summary.mean:.6g} variance {summary.variance:.6g} "
          f"skewness {summary.skewness:.6g} excess_kurtosis {summary.excess_kurtosis:.6g} "
          f"ks {summary.ks_distance:.6g} closest_variance {report['closest_variance']}")
    return EXIT_OK


def cmd_heights(args) -> int:
    from .transforms import height_tail, loglog_slope

    cfg = _resolve(args, ("n1", "n2", "samples", "seed", "L"),
                   {"n1": 6.0, "n2": 6.0, "samples": 10**5, "seed": 0, "L": [2, 4, 8, 16]})
    out = _out_dir(args)
    _echo_config(cfg, out, "heights")
    rows = height_tail((float(cfg["n1"]), float(cfg["n2"])), cfg["L"], int(cfg["samples"]), int(cfg["seed"]))
    fr = [f for _, f in rows]
    slope = loglog_slope([L for L, _ in rows], fr) if all(f > 0 for f in fr) else math.nan
    if out is not None:
        with open(out / "heights.csv", "w", encoding="utf-8", newline="") as fh:
            fh.write("L,fraction\n")
            for L, f in rows:
                fh.write(f"{L!r},{f!r}\n")
    print(" ".join(f"L={L:g}:{f:.6g}" for L, f in rows) + f" slope {slope:.4g}")
    return EXIT_OK


def cmd_probe(args) -> int:
    from .transforms import decorrelation_probe, write_probe_csv

    cfg = _resolve(args, ("box", "t_a", "t_b", "samples", "seed"),
                   {"box": "-0.5,0.5,-0.5,0.5,0.5,1.5", "t_a": [3.5, 4.5], "t_b": [4.5, 3.5],
                    "samples": 10**5, "seed": 0})
    box = _parse_box(cfg["box"]) if isinstance(cfg["box"], str) else (tuple(cfg["box"][0]), tuple(cfg["box"][1]))
    out = _out_dir(args)
    _echo_config(cfg, out, "probe")
    est = decorrelation_probe(box, tuple(cfg["t_a"]), tuple(cfg["t_b"]), int(cfg["samples"]), int(cfg["seed"]))
    if out is not None:
        write_probe_csv(out / "probe.csv", [(f"{cfg['t_a']}|{cfg['t_b']}", est.value, est.stderr)])
    print(f"covariance {est.value!r} stderr {est.stderr!r}")
    return EXIT_OK


def cmd_small(args) -> int:
    from .experiments import small_products_study

    cfg = _resolve(args, ("K", "T_grid", "samples", "seed", "c"),
                   {"K": 4.0, "T_grid": [1e5, 1e6], "samples": 1000, "seed": 0, "c": 0.5})
    out = _out_dir(args)
    _echo_config(cfg, out, "small")
    rows = small_products_study(float(cfg["K"]), cfg["T_grid"], int(cfg["samples"]), int(cfg["seed"]),
                                float(cfg["c"]))
    if out is not None:
        with open(out / "small_products.csv", "w", encoding="utf-8", newline="") as fh:
            fh.write("T,mean,max,volume\n")
            for r in rows:
                fh.write(f"{r.T!r},{r.mean!r},{r.max},{r.volume!r}\n")
    print(" ".join(f"T={r.T:g}:mean={r.mean:.6g},max={r.max}" for r in rows))
    return EXIT_OK


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="multclt", description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=None,
                    help="cap on worker threads (fallback: MULTCLT_THREADS); results do not depend on it")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("--config", help="JSON file with flat keys; flags override it")
        sp.add_argument("--out", help="directory for artifacts (created if missing)")

    sp = sub.add_parser("count", help="count solutions for one x")
    for k in ("x1", "x2", "a", "b", "c", "T"):
        sp.add_argument(f"--{k}", type=float, required=True)
    sp.add_argument("--lattice", action="store_true", help="cross-check by lattice enumeration (T <= 1e5)")
    common(sp, config=False)
    sp.set_defaults(func=cmd_count)

    sp = sub.add_parser("volume", help="Vol(Omega), exact and asymptotic")
    for k in ("a", "b", "c", "T"):
        sp.add_argument(f"--{k}", type=float)
    common(sp)
    sp.set_defaults(func=cmd_volume)

    sp = sub.add_parser("variance", help="the variance series sigma^2")
    sp.add_argument("--pq-cutoff", dest="pq_cutoff", type=int)
    sp.add_argument("--m-cutoff", dest="m_cutoff", type=int)
    sp.add_argument("--variant")
    common(sp)
    sp.set_defaults(func=cmd_variance)

    sp = sub.add_parser("clt", help="Monte Carlo run of the normalized discrepancy")
    for k in ("a", "b", "c", "T"):
        sp.add_argument(f"--{k}", type=float)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--sigma-variant", dest="sigma_variant")
    sp.add_argument("--T-grid", dest="T_grid", type=float, nargs="+")
    sp.add_argument("--bins", default=None, help="histogram bins: an integer or a numpy rule (default fd)")
    common(sp)
    sp.set_defaults(func=cmd_clt)

    sp = sub.add_parser("heights", help="tail of the height function along the flow")
    sp.add_argument("--n1", type=float)
    sp.add_argument("--n2", type=float)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--L", type=float, nargs="+")
    common(sp)
    sp.set_defaults(func=cmd_heights)

    sp = sub.add_parser("probe", help="covariance of Siegel transforms at two flow times")
    sp.add_argument("--box", help="x1lo,x1hi,x2lo,x2hi,ylo,yhi")
    sp.add_argument("--t-a", dest="t_a", type=float, nargs=2)
    sp.add_argument("--t-b", dest="t_b", type=float, nargs=2)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--seed", type=int)
    common(sp)
    sp.set_defaults(func=cmd_probe)

    sp = sub.add_parser("small", help="counts of very small products")
    sp.add_argument("--K", type=float)
    sp.add_argument("--T-grid", dest="T_grid", type=float, nargs="+")
    sp.add_argument("--samples", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--c", type=float)
    common(sp)
    sp.set_defaults(func=cmd_small)
    return ap


def main(argv=None) -> int:
    from .lattice import EnumerationBudgetError

    args = build_parser().parse_args(argv)
    try:
        _set_threads(args.threads)
        return args.func(args)
    except EnumerationBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InvalidParameterError, OverflowError, ValueError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
