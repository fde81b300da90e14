"""Drive one configured experiment end to end and emit its result tables."""

from __future__ import annotations

import logging
import subprocess
import time
from importlib import metadata
from pathlib import Path

from .config import RunConfig
from .io import Column, ResultTable, write_table
from .uav.catalog import load_catalog
from .uav.experiments import (
    Adaptive,
    Curve,
    Distributional,
    experiment_adaptive,
    experiment_deterministic,
    experiment_distributional,
    experiment_interval,
)
from .uav.model import UavModel

log = logging.getLogger("codesign")

G, USD = "g", "$"


def version_string() -> str:
    """``git describe`` of the source tree when available, else the installed version."""
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(["git", "describe", "--tags", "--always", "--dirty"], cwd=here,
                             capture_output=True, text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def build_model(cfg: RunConfig, frac: float | None = None) -> UavModel:
    cat = load_catalog(cfg.catalog or None)
    return UavModel(cat, fraction=cfg.frac if frac is None else frac, backend=cfg.backend or None)


# ---------------------------------------------------------------------------
# tables

def tradeoff_table(curves: dict[str, Curve]) -> ResultTable:
    rows = [(name, float(w), float(c), a, b)
            for name, cv in curves.items()
            for w, c, a, b in zip(cv.payloads, cv.cost, cv.actuator, cv.battery)]
    return ResultTable("tradeoff", "tradeoff/1",
                       [Column("curve"), Column("payload", G), Column("min_cost", USD), Column("actuator"),
                        Column("battery")], rows)


def violin_table(d: Distributional) -> ResultTable:
    rows = [(float(w), i, float(c)) for w, row in zip(d.payloads, d.samples) for i, c in enumerate(row)]
    return ResultTable("violin", "violin/1", [Column("payload", G), Column("sample_idx"), Column("cost", USD)], rows)


def quantile_table(d: Distributional) -> ResultTable:
    rows = [(float(w), float(q), float(v)) for w, qs in zip(d.payloads, d.quantiles)
            for q, v in zip(d.quantile_levels, qs)]
    return ResultTable("quantiles", "quantiles/1",
                       [Column("payload", G), Column("quantile"), Column("cost", USD)], rows)


def bounds_table(d: Distributional) -> ResultTable:
    rows = [(float(w), float(lo), float(hi), d.level, float(f))
            for w, lo, hi, f in zip(d.payloads, d.lower_cost, d.upper_cost, d.out_of_bound)]
    return ResultTable("bounds", "bounds/1",
                       [Column("payload", G), Column("lower_cost", USD), Column("upper_cost", USD),
                        Column("level"), Column("out_of_bound_frac")], rows)


def choices_table(d: Distributional) -> ResultTable:
    rows = []
    for w, probs in zip(d.payloads, d.choice_probabilities()):
        for (a, b), p in sorted(probs.items()):
            rows.append((float(w), a, b, float(p)))
    return ResultTable("choices", "choices/1",
                       [Column("payload", G), Column("actuator"), Column("battery"), Column("optimality_prob")],
                       rows)


def adaptive_tables(r: Adaptive) -> list[ResultTable]:
    samples = [(lev, float(w), i, float(c)) for lev, arr in r.samples.items()
               for w, row in zip(r.payloads, arr) for i, c in enumerate(row)]
    means, qs = r.means(), r.quantiles()
    summary = [(lev, float(w), float(means[lev][k]), *map(float, qs[lev][k]))
               for lev in r.samples for k, w in enumerate(r.payloads)]
    levels = list(r.samples)
    diffs = []
    for i, better in enumerate(levels):
        for worse in levels[:i]:
            for w, pd in zip(r.payloads, r.diffs(better, worse)):
                diffs.append((better, worse, float(w), pd.mean, pd.lo, pd.hi))
    return [
        ResultTable("adaptive", "adaptive/1",
                    [Column("level"), Column("payload", G), Column("sample_idx"), Column("cost", USD)], samples),
        ResultTable("adaptive_summary", "adaptive_summary/1",
                    [Column("level"), Column("payload", G), Column("mean_cost", USD)]
                    + [Column(f"q{round(q * 100):02d}_cost", USD) for q in r.quantile_levels], summary),
        ResultTable("adaptive_diffs", "adaptive_diffs/1",
                    [Column("level"), Column("versus"), Column("payload", G), Column("mean_gap", USD),
                     Column("ci95_lo", USD), Column("ci95_hi", USD)], diffs),
    ]


# ---------------------------------------------------------------------------
# experiments

def tables_for(cfg: RunConfig) -> list[ResultTable]:
    if cfg.experiment == "deterministic":
        return [tradeoff_table({"nominal": experiment_deterministic(build_model(cfg), cfg.payloads)})]
    if cfg.experiment == "interval":
        return [tradeoff_table(experiment_interval(build_model(cfg), cfg.payloads, cfg.frac))]
    if cfg.experiment == "distributional":
        model = build_model(cfg)
        d = experiment_distributional(model, cfg.payloads, cfg.n, cfg.seed, cfg.rho, cfg.workers)
        return [violin_table(d), quantile_table(d), bounds_table(d), choices_table(d),
                tradeoff_table({"nominal": experiment_deterministic(model, cfg.payloads)})]
    if cfg.experiment == "adaptive":
        r = experiment_adaptive(build_model(cfg), cfg.payloads, cfg.n, cfg.seed, cfg.workers,
                                cfg.inner_n, cfg.policy_n)
        return adaptive_tables(r)
    if cfg.experiment == "selftest":
        from .selftest import run_selftest, selftest_table

        return [selftest_table(run_selftest(cfg.seed))]
    raise ValueError(f"unknown experiment {cfg.experiment!r}")


def run(cfg: RunConfig) -> tuple[list[ResultTable], list[Path]]:
    t0 = time.perf_counter()
    log.info("running %s (n=%d, seed=%d, workers=%d)", cfg.experiment, cfg.n, cfg.seed, cfg.workers)
    tables = tables_for(cfg)
    wall = time.perf_counter() - t0
    meta = {"config_hash": cfg.content_hash(), "seed": cfg.seed, "version": version_string(),
            "wall_time_s": round(wall, 3), "experiment": cfg.experiment}
    out = Path(cfg.out)
    written: list[Path] = []
    plot = None
    if "svg" in cfg.formats:
        from .plots import plot_table as plot
    for t in tables:
        t.meta = dict(meta)
        written += write_table(t, out, cfg.formats, plot)
    log.info("wrote %d files to %s in %.1f s", len(written), out, wall)
    return tables, written
