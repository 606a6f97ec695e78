"""Benchmark harness: all four search variants on shared random draws.

Each run draws a source and a goal subset from one seeded stream, then
runs the variants back to back in a fixed order (MLS, t-MLS, kPC-MLS,
t-kPC-MLS) and checks they return identical Pareto cost sets.
"""
from __future__ import annotations

import csv
import gc
import io
import json
import logging
import random
import statistics
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from . import mls
from .criteria import DECIMALS, Scheme, generate
from .graph import MultiGraph, load_graph
from .kpc import DEFAULT_K, BuildReport, OverlayGraph, build_overlay

log = logging.getLogger(__name__)

RESULT_COLUMNS = ("run", "source", "variant", "time_ms", "peak_labels", "pareto_total",
                  "speedup_vs_mls", "consistent")
TIMING_COLUMNS = ("time_ms", "speedup_vs_mls")
SUMMARY_COLUMNS = ("variant", "runs", "mean_ms", "std_ms", "speedup", "labels_avg", "labels_max",
                   "pareto_avg")


@dataclass
class ExperimentConfig:
    graph_path: str | None = None
    scheme: str | None = None
    scheme_seed: int = 0
    k: int = DEFAULT_K
    runs: int = 1000
    goal_count: int = 1000
    seed: int = 0
    variants: tuple[str, ...] = mls.VARIANTS
    triangle: bool = True
    out: str | None = None
    warmup: int = 1

    def validate(self, n: int) -> None:
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not 0 <= self.goal_count <= n:
            raise ValueError(f"goal count {self.goal_count} exceeds vertex count {n}")
        if self.k < 2:
            raise ValueError("k must be >= 2")
        unknown = set(self.variants) - set(mls.VARIANTS)
        if unknown:
            raise ValueError(f"unknown variants: {sorted(unknown)}")


@dataclass
class VariantMetrics:
    time_ms: float
    peak_labels: int
    pareto_total: int


@dataclass
class ExperimentRecord:
    run: int
    source: int
    metrics: dict[str, VariantMetrics]
    consistent: bool
    mismatched_goals: list[int] = field(default_factory=list)


@dataclass
class ExperimentReport:
    records: list[ExperimentRecord]
    summary: list[dict]
    build: BuildReport | None
    vertex_count: int
    variants: tuple[str, ...]

    @property
    def failures(self) -> list[ExperimentRecord]:
        return [r for r in self.records if not r.consistent]

    def mean_time(self, variant: str) -> float:
        return statistics.fmean(r.metrics[variant].time_ms for r in self.records)

    def mean_peak(self, variant: str) -> float:
        return statistics.fmean(r.metrics[variant].peak_labels for r in self.records)


def draw_run(rng: random.Random, n: int, goal_count: int) -> tuple[int, list[int]]:
    """One source plus goals sampled without replacement, all uniform."""
    source = rng.randrange(n)
    goals = sorted(rng.sample(range(n), goal_count))
    return source, goals


def comparable(cost_sets: dict, decimals: int = DECIMALS) -> dict:
    """Cost sets rounded to the generator's resolution.

    Overlay variants add the same edge weights in a different order than
    plain search, so float sums may differ in the last bits.
    """
    return {t: {tuple(round(x, decimals) for x in c) for c in costs} for t, costs in cost_sets.items()}


def _run_variants(g, overlay, views, variants, source, goals):
    """Run each variant once.  As with :mod:`timeit`, the cyclic garbage
    collector is paused during each query so its pauses do not land on
    whichever variant happens to be running; it is run in between."""
    results = {}
    enabled = gc.isenabled()
    try:
        for variant in variants:
            base = views["kpc"] if "kpc" in variant else views["graph"]
            gc.collect()
            gc.disable()
            results[variant] = mls.query(g, source, goals, variant, overlay, base_view=base)
            gc.enable()
    finally:
        if enabled:
            gc.enable()
        else:
            gc.disable()
    return results


def run_experiments(cfg: ExperimentConfig, graph: MultiGraph | None = None,
                    overlay: OverlayGraph | None = None) -> ExperimentReport:
    if graph is None:
        if cfg.graph_path is None:
            raise ValueError("either a graph or a graph path is required")
        with open(cfg.graph_path, encoding="utf-8") as fh:
            graph = load_graph(fh)
    g = graph
    if cfg.scheme:
        g = generate(g, Scheme(cfg.scheme, cfg.scheme_seed))
    cfg.validate(g.n)

    build = None
    needs_overlay = any("kpc" in v for v in cfg.variants)
    if needs_overlay and overlay is None:
        overlay, build = build_overlay(g, cfg.k, cfg.triangle, workers=1)
        log.info("overlay: %d cover vertices (%.1f%%), %d edges, %.2fs",
                 build.cover_size, 100 * build.cover_ratio, build.overlay_edges, build.total_seconds)
    views = {"graph": mls.graph_view(g),
             "kpc": mls.overlay_view(g, overlay) if needs_overlay else None}

    rng = random.Random(cfg.seed)
    draws = [draw_run(rng, g.n, cfg.goal_count) for _ in range(cfg.runs)]
    for _ in range(cfg.warmup):
        _run_variants(g, overlay, views, cfg.variants, *draws[0])

    records = []
    for run, (source, goals) in enumerate(draws):
        results = _run_variants(g, overlay, views, cfg.variants, source, goals)
        reference = comparable(results[cfg.variants[0]].cost_sets())
        mismatched = sorted({t for res in results.values() for t, costs in comparable(res.cost_sets()).items()
                             if costs != reference[t]})
        metrics = {v: VariantMetrics(r.stats.seconds * 1000.0, r.stats.peak_labels, r.pareto_total)
                   for v, r in results.items()}
        record = ExperimentRecord(run, source, metrics, not mismatched, mismatched)
        if mismatched:
            log.error("run %d: variants disagree on %d goal(s)", run, len(mismatched))
            if cfg.out:
                dump_failure(Path(cfg.out).with_suffix(f".fail{run}.json"), cfg, record, goals)
        records.append(record)
        log.debug("run %d source %d: %s", run, source,
                  ", ".join(f"{v}={m.time_ms:.1f}ms" for v, m in metrics.items()))

    report = ExperimentReport(records, summarize(records, cfg.variants), build, g.n, tuple(cfg.variants))
    if cfg.out:
        write_results(report, cfg.out)
    return report


def dump_failure(path: Path, cfg: ExperimentConfig, record: ExperimentRecord, goals: Sequence[int]) -> None:
    payload = {"config": asdict(cfg), "run": record.run, "source": record.source,
               "goals": list(goals), "mismatched_goals": record.mismatched_goals}
    path.write_text(json.dumps(payload, indent=2), encoding="utf-8")


def summarize(records: Sequence[ExperimentRecord], variants: Sequence[str]) -> list[dict]:
    """Per-variant runtime mean/stddev, speedup over MLS, label counts."""
    if not records:
        raise ValueError("no records to summarize")
    baseline = None
    if "mls" in variants:
        baseline = statistics.fmean(r.metrics["mls"].time_ms for r in records)
    rows = []
    for v in variants:
        times = [r.metrics[v].time_ms for r in records]
        peaks = [r.metrics[v].peak_labels for r in records]
        mean = statistics.fmean(times)
        rows.append({
            "variant": v,
            "runs": len(records),
            "mean_ms": mean,
            "std_ms": statistics.pstdev(times),
            "speedup": (baseline / mean if mean > 0 else float("inf")) if baseline is not None else None,
            "labels_avg": statistics.fmean(peaks),
            "labels_max": max(peaks),
            "pareto_avg": statistics.fmean(r.metrics[v].pareto_total for r in records),
        })
    return rows


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.3f}"
    return str(x)


def results_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for r in report.records:
        base = r.metrics["mls"].time_ms if "mls" in r.metrics else None
        for v in report.variants:
            m = r.metrics[v]
            speedup = base / m.time_ms if base is not None and m.time_ms > 0 else None
            writer.writerow([r.run, r.source + 1, v, _fmt(m.time_ms), m.peak_labels, m.pareto_total,
                             _fmt(speedup), int(r.consistent)])
    return buf.getvalue()


def summary_csv(report: ExperimentReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for row in report.summary:
        writer.writerow([_fmt(row[c]) for c in SUMMARY_COLUMNS])
    return buf.getvalue()


def summary_table(report: ExperimentReport) -> str:
    lines = [f"{'variant':<10} {'mean ms':>12} {'std ms':>12} {'speedup':>8} {'labels avg/max':>22}"]
    for row in report.summary:
        speed = f"{row['speedup']:.2f}" if row["speedup"] is not None else "-"
        labels = f"{row['labels_avg']:.0f}/{row['labels_max']}"
        lines.append(f"{row['variant']:<10} {row['mean_ms']:>12.2f} {row['std_ms']:>12.2f} {speed:>8} {labels:>22}")
    if report.build is not None:
        b = report.build
        lines.append(f"cover {b.cover_size}/{b.vertex_count} ({100 * b.cover_ratio:.2f}%), "
                     f"overlay edges {b.overlay_edges}/{b.edge_count}, preprocessing {b.total_seconds:.2f}s")
    failed = len(report.failures)
    lines.append(f"consistent runs: {len(report.records) - failed}/{len(report.records)}")
    return "\n".join(lines)


def summary_path(out: str | Path) -> Path:
    out = Path(out)
    return out.with_name(out.stem + "_summary" + (out.suffix or ".csv"))


def write_results(report: ExperimentReport, out: str | Path) -> None:
    Path(out).write_text(results_csv(report), encoding="utf-8")
    summary_path(out).write_text(summary_csv(report), encoding="utf-8")


def strip_timing(csv_text: str) -> str:
    """Drop the timing columns so two result files can be compared byte for byte."""
    rows = list(csv.reader(io.StringIO(csv_text)))
    if not rows:
        return ""
    drop = {rows[0].index(c) for c in TIMING_COLUMNS if c in rows[0]}
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow([x for i, x in enumerate(row) if i not in drop])
    return buf.getvalue()
