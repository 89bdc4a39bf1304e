"""Command line entry point: ``netcrawl run|verify|centrality|overlap``.

Exit codes: 0 success, 2 configuration error, 3 data error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import centrality as cent
from .experiment import (
    REGISTRY,
    ConfigError,
    DataError,
    DatasetRegistryEntry,
    ExperimentConfig,
    emit_target_overlap,
    load_graph,
    read_config,
    run_experiment,
    score_tables,
    verify_dataset,
)

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3

# flag name -> ExperimentConfig field
_RUN_FLAGS = {
    "crawlers": "crawlers",
    "measures": "measures",
    "p": "p",
    "seeds": "seeds",
    "master_seed": "master_seed",
    "sample_edges": "sample_edges",
    "betweenness": "betweenness",
    "output_dir": "output_dir",
    "formats": "formats",
    "metrics": "metrics",
    "resolution": "resolution",
    "workers": "workers",
    "data_dir": "data_dir",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="netcrawl", description="Benchmark online network crawlers on collecting influential nodes.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a crawling experiment")
    run.add_argument("--config", help="flat key = value config file; flags override it")
    run.add_argument("--graph", action="append", help="edge list path, registry name or gen:<kind>:<args>")
    run.add_argument("--crawlers", help="comma separated subset of RC,RW,DFS,BFS,MOD,DE")
    run.add_argument("--measures", help="comma separated subset of degree,coreness,betweenness,eccentricity")
    run.add_argument("--p", type=float, help="target fraction (default 0.1)")
    run.add_argument("--seeds", type=int, help="seed nodes per graph (default 8)")
    run.add_argument("--master-seed", type=int)
    run.add_argument("--sample-edges", choices=["closed-incident", "induced"])
    run.add_argument("--betweenness", help="'exact' or 'approx:<pivots>'")
    run.add_argument("--output-dir")
    run.add_argument("--formats", help="comma separated: csv,json")
    run.add_argument("--metrics", help="comma separated: node_coverage,target_closed,target_observed")
    run.add_argument("--resolution", type=int, help="points per curve in the CSV (0 = every iteration)")
    run.add_argument("--workers", type=int)
    run.add_argument("--data-dir")
    run.add_argument("--no-cache", action="store_true", help="do not read or write centrality caches")

    ver = sub.add_parser("verify", help="check local datasets against the registry")
    ver.add_argument("names", nargs="*", help="registry names (default: all)")
    ver.add_argument("--data-dir", default="data")
    ver.add_argument("--path", help="file to check (single name only)")
    ver.add_argument("--nodes", type=int, help="expected giant-component nodes for an unregistered file")
    ver.add_argument("--edges", type=int, help="expected giant-component edges for an unregistered file")

    c = sub.add_parser("centrality", help="compute and cache score tables")
    c.add_argument("--graph", required=True)
    c.add_argument("--measures", default=",".join(cent.MEASURES))
    c.add_argument("--betweenness", default="exact")
    c.add_argument("--master-seed", type=int, default=0)
    c.add_argument("--data-dir", default="data")
    c.add_argument("--output", help="also write the tables to this CSV")

    o = sub.add_parser("overlap", help="intersection sizes of top-p target sets")
    o.add_argument("--graph", required=True)
    o.add_argument("--measures", default=",".join(cent.MEASURES))
    o.add_argument("--p", type=float, default=0.1)
    o.add_argument("--betweenness", default="exact")
    o.add_argument("--master-seed", type=int, default=0)
    o.add_argument("--data-dir", default="data")
    o.add_argument("--output", help="JSON file (default: stdout)")
    return parser


def _cmd_run(args) -> int:
    values: dict = read_config(args.config) if args.config else {}
    for flag, key in _RUN_FLAGS.items():
        v = getattr(args, flag)
        if v is not None:
            values[key] = v
    if args.graph:
        values["graphs"] = args.graph
    if args.no_cache:
        values["cache"] = False
    config = ExperimentConfig.from_mapping(values)
    run_experiment(config)
    print(f"results written to {config.output_dir}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    if args.nodes is not None or args.edges is not None:
        if not args.path or args.nodes is None or args.edges is None:
            raise ConfigError("--nodes/--edges need --path and both counts")
        entries = [(DatasetRegistryEntry(Path(args.path).stem, Path(args.path).name, args.nodes, args.edges),
                    Path(args.path))]
    else:
        names = args.names or list(REGISTRY)
        unknown = [n for n in names if n not in REGISTRY]
        if unknown:
            raise ConfigError(f"unknown dataset(s): {', '.join(unknown)}")
        if args.path and len(names) != 1:
            raise ConfigError("--path needs exactly one dataset name")
        entries = [(REGISTRY[n], Path(args.path) if args.path else Path(args.data_dir) / REGISTRY[n].filename)
                   for n in names]
    reports = []
    for entry, path in entries:
        if not path.exists() and not args.names and not args.path:
            reports.append({"name": entry.name, "path": str(path), "missing": True})
            continue
        reports.append(verify_dataset(entry, path))
    print(json.dumps(reports, indent=2))
    return EXIT_OK


def _tables_for(args):
    measures = [m.strip() for m in args.measures.split(",") if m.strip()]
    for m in measures:
        if m not in cent.MEASURES:
            raise ConfigError(f"unknown measure {m!r}")
    pivots = ExperimentConfig(graphs=[args.graph], betweenness=args.betweenness).betweenness_pivots
    g, path = load_graph(args.graph, args.data_dir)
    return g, score_tables(g, measures, path, pivots, args.master_seed)


def _cmd_centrality(args) -> int:
    g, tables = _tables_for(args)
    if args.output:
        with open(args.output, "w") as fh:
            cent.write_scores_csv(tables.values(), g, fh)
    for m, t in tables.items():
        print(f"{g.name}\t{m}\tmin={t.scores.min():g}\tmax={t.scores.max():g}")
    return EXIT_OK


def _cmd_overlap(args) -> int:
    g, tables = _tables_for(args)
    if len(tables) < 2:
        raise ConfigError("overlap needs at least two measures")
    report = {g.name: emit_target_overlap(tables, args.p)}
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


_COMMANDS = {"run": _cmd_run, "verify": _cmd_verify, "centrality": _cmd_centrality, "overlap": _cmd_overlap}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s:%(name)s:%(message)s")
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
