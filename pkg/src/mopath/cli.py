"""Command line entry point: ``mopath <subcommand> ...``.

Vertex ids on the command line and in every file are 1-based.  Exit codes:
0 success, 1 consistency or internal failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from pathlib import Path

from . import bench, mls, oracle
from .criteria import SCHEMES, Scheme, generate
from .graph import GraphFormatError, MultiGraph, format_value, load_goals, load_graph, save_graph
from .kpc import DEFAULT_K, OverlayError, build_overlay, cover_stats, load_overlay, save_overlay
from .synthetic import road_grid

log = logging.getLogger("mopath")


class UsageError(Exception):
    pass


def _read_graph(path: str) -> MultiGraph:
    try:
        with open(path, encoding="utf-8") as fh:
            return load_graph(fh)
    except OSError as exc:
        raise UsageError(f"cannot read graph: {exc}") from None
    except GraphFormatError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _read_goals(path: str, n: int) -> set[int]:
    try:
        with open(path, encoding="utf-8") as fh:
            return load_goals(fh, n)
    except OSError as exc:
        raise UsageError(f"cannot read goals: {exc}") from None
    except GraphFormatError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _graph_arg(args) -> MultiGraph:
    if getattr(args, "road_grid", None):
        side, segment = args.road_grid
        return road_grid(side, segment, seed=args.grid_seed)
    if not args.graph:
        raise UsageError("--graph is required")
    return _read_graph(args.graph)


def _open_out(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def cmd_gen(args) -> int:
    g = _graph_arg(args)
    if args.scheme:
        try:
            g = generate(g, Scheme(args.scheme, args.seed))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    out, close = _open_out(args.out)
    try:
        save_graph(g, out)
    finally:
        if close:
            out.close()
    return 0


def cmd_preprocess(args) -> int:
    if args.k < 2:
        raise UsageError("k must be >= 2")
    g = _graph_arg(args)
    if args.goals:
        g = g.with_goals(g.goals | _read_goals(args.goals, g.n))
    order = None
    if args.order == "custom":
        if not args.order_file:
            raise UsageError("--order custom needs --order-file")
        order = _read_order(args.order_file, g.n)
    try:
        ov, report = build_overlay(g, args.k, not args.no_triangle_prune, order)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with open(args.out, "w", encoding="utf-8") as fh:
        save_overlay(ov, fh)
    print(f"cover {report.cover_size}/{report.vertex_count} ({100 * report.cover_ratio:.2f}%), "
          f"overlay edges {report.overlay_edges}/{report.edge_count} ({100 * report.edge_ratio:.2f}%), "
          f"{report.total_seconds:.2f}s")
    return 0


def _read_order(path: str, n: int) -> list[int]:
    """Scan order file: 1-based ids, one per line, any permutation subset."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read order file: {exc}") from None
    order = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        tok = line.strip()
        if not tok:
            continue
        try:
            v = int(tok) - 1
        except ValueError:
            raise UsageError(f"{path}: line {lineno}: bad vertex id") from None
        if not 0 <= v < n:
            raise UsageError(f"{path}: line {lineno}: vertex id out of range")
        order.append(v)
    return order


def _load_overlay_for(path: str, g: MultiGraph):
    try:
        with open(path, encoding="utf-8") as fh:
            return load_overlay(fh, g)
    except OSError as exc:
        raise UsageError(f"cannot read overlay: {exc}") from None
    except OverlayError as exc:
        raise UsageError(f"{path}: {exc}") from None


def cmd_query(args) -> int:
    g = _read_graph(args.graph)
    source = args.source - 1
    if not 0 <= source < g.n:
        raise UsageError(f"unknown source id {args.source}")
    goals = set(g.goals)
    if args.goals:
        goals |= _read_goals(args.goals, g.n)
    for t in args.goal or ():
        if not 1 <= t <= g.n:
            raise UsageError(f"unknown goal id {t}")
        goals.add(t - 1)
    if not goals:
        log.warning("no goals given; using every vertex")
        goals = set(range(g.n))
    overlay = None
    if "kpc" in args.variant:
        if args.overlay:
            overlay = _load_overlay_for(args.overlay, g)
        else:
            log.warning("no --overlay given; building one with k=%d", args.k)
            overlay, _ = build_overlay(g, args.k)
    try:
        result = mls.query(g, source, goals, args.variant, overlay)
    except mls.QueryError as exc:
        raise UsageError(str(exc)) from None
    out, close = _open_out(args.out)
    try:
        write_query_csv(result, out, args.paths)
    finally:
        if close:
            out.close()
    if result.unreachable:
        log.warning("%d goal(s) unreachable", len(result.unreachable))
    log.info("%s: %d labels, %.3fs", args.variant, result.stats.popped, result.stats.seconds)
    return 0


def write_query_csv(result: mls.QueryResult, stream, with_paths: bool = False) -> None:
    q = result.criteria.count
    writer = csv.writer(stream, lineterminator="\n")
    header = ["goal"] + [f"c{i + 1}" for i in range(q)]
    if with_paths:
        header.append("path")
    writer.writerow(header)
    for goal in sorted(result.pareto):
        for label in result.pareto[goal]:
            row = [goal + 1] + [format_value(c) for c in result.criteria.decanonicalize(label.cost)]
            if with_paths:
                row.append(" ".join(str(v + 1) for v in result.path(label).vertices))
            writer.writerow(row)


def cmd_bench(args) -> int:
    g = _graph_arg(args)
    cfg = bench.ExperimentConfig(
        graph_path=args.graph, scheme=args.scheme, scheme_seed=args.scheme_seed, k=args.k,
        runs=args.runs, goal_count=args.goal_count, seed=args.seed,
        variants=tuple(args.variants), triangle=not args.no_triangle_prune, out=args.out,
        warmup=args.warmup)
    try:
        report = bench.run_experiments(cfg, graph=g)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(bench.summary_table(report))
    return 1 if report.failures else 0


def cmd_cover_stats(args) -> int:
    g = _read_graph(args.graph)
    if args.overlay:
        ov = _load_overlay_for(args.overlay, g)
        seconds = None
    else:
        started = time.perf_counter()
        ov, _ = build_overlay(g, args.k, not args.no_triangle_prune)
        seconds = time.perf_counter() - started
    stats = cover_stats(g, ov, seconds)
    for key, value in stats.items():
        if value is not None:
            print(f"{key}: {value:.4f}" if isinstance(value, float) else f"{key}: {value}")
    return 0


def cmd_oracle_check(args) -> int:
    """Fuzz every variant against brute-force enumeration."""
    failures = 0
    for seed in range(args.start, args.start + args.instances):
        g = oracle.random_instance(seed, args.n, args.edge_prob, args.q, args.weight_range, goals=2)
        source = seed % g.n
        truth = oracle.enumerate_pareto_all(g, source)
        ov, _ = build_overlay(g, args.k)
        for variant in mls.VARIANTS:
            res = mls.query(g, source, range(g.n), variant, ov)
            bad = [t for t in range(g.n) if res.cost_set(t) != truth[t]]
            if bad:
                failures += 1
                print(f"seed {seed} variant {variant}: mismatch at goals {[t + 1 for t in bad]}")
    print(f"{args.instances} instances, {failures} failure(s)")
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mopath", description="k-path-cover multicriteria shortest paths")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def graph_source(p):
        p.add_argument("--graph", required=False, help="graph file (extended DIMACS)")
        p.add_argument("--road-grid", nargs=2, type=int, metavar=("SIDE", "SEGMENT"),
                       help="use a synthetic road grid instead of --graph")
        p.add_argument("--grid-seed", type=int, default=0)

    p = sub.add_parser("gen", help="regenerate criteria with a synthetic scheme")
    graph_source(p)
    p.add_argument("--scheme", choices=SCHEMES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("preprocess", help="build a k-path-cover overlay")
    graph_source(p)
    p.add_argument("--goals", help="goal file, one 1-based id per line")
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--no-triangle-prune", action="store_true")
    p.add_argument("--order", choices=("id", "custom"), default="id")
    p.add_argument("--order-file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("query", help="Pareto sets from one source to many goals")
    p.add_argument("--graph", required=True)
    p.add_argument("--overlay")
    p.add_argument("--source", type=int, required=True)
    p.add_argument("--goals", help="goal file")
    p.add_argument("--goal", type=int, action="append", help="goal id (repeatable)")
    p.add_argument("--variant", choices=mls.VARIANTS, default="t-kpc-mls")
    p.add_argument("--k", type=int, default=DEFAULT_K, help="k for an on-the-fly overlay")
    p.add_argument("--paths", action="store_true", help="add full vertex sequences")
    p.add_argument("--out")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("bench", help="run the four variants on random draws")
    graph_source(p)
    p.add_argument("--scheme", choices=SCHEMES)
    p.add_argument("--scheme-seed", type=int, default=0)
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--goal-count", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variants", nargs="+", choices=mls.VARIANTS, default=list(mls.VARIANTS))
    p.add_argument("--no-triangle-prune", action="store_true")
    p.add_argument("--warmup", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("cover-stats", help="cover and overlay size ratios")
    p.add_argument("--graph", required=True)
    p.add_argument("--overlay")
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--no-triangle-prune", action="store_true")
    p.set_defaults(func=cmd_cover_stats)

    p = sub.add_parser("oracle-check")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--start", type=int, default=0)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--edge-prob", type=float, default=0.3)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--weight-range", type=int, default=10)
    p.add_argument("--k", type=int, default=3)
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mopath: error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"mopath: internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
