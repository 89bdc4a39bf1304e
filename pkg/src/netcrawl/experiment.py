"""Reproducible crawler experiments.

An experiment crawls every configured graph with every crawler from the same
set of seed nodes and writes

* ``curves.csv``   long-form coverage curves
  (``graph,crawler,seed,metric,measure,iteration,value``),
* ``summary.json`` graph -> crawler -> measure -> ``{auc, final_value}``,
  computed on seed-averaged curves (node coverage is stored under the
  measure key ``nodes``),
* ``winners.json`` measure -> crawler -> number of graphs won on AUC,
* ``overlap.json`` graph -> target set intersection sizes.

Seeds: the seed nodes of a graph are drawn without replacement from a
generator keyed by ``(master_seed, graph, "seed-nodes")``; every crawl gets
its own generator keyed by ``(master_seed, graph, crawler, seed_index)``.
Keys are folded into integers with SHA-256, so rerunning a single cell
reproduces it exactly.
"""
from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import logging
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import centrality as cent
from .crawl import CRAWLERS, SAMPLE_EDGE_MODES, RunTrace, run_crawl
from .graph import Graph, GraphError, generate, giant_component, parse_edge_list
from .metrics import METRICS, CoverageCurve, auc, average_curves, node_coverage, target_coverage, winner_tally

log = logging.getLogger(__name__)

__all__ = [
    "ConfigError",
    "DataError",
    "ExperimentConfig",
    "DatasetRegistryEntry",
    "REGISTRY",
    "derive_seed",
    "load_graph",
    "choose_seed_nodes",
    "score_tables",
    "run_experiment",
    "verify_dataset",
    "emit_target_overlap",
    "read_config",
]


class ConfigError(ValueError):
    exit_code = 2


class DataError(RuntimeError):
    exit_code = 3


# -------------------------------------------------------------------- registry

@dataclass(frozen=True)
class DatasetRegistryEntry:
    name: str
    filename: str
    nodes: int
    edges: int
    description: str = ""

    def __post_init__(self):
        if self.nodes <= 0 or self.edges <= 0:
            raise ValueError("expected counts must be positive")


# Counts refer to the giant component. Files are not shipped; drop the edge
# lists (two labels per line) into the data directory under these names.
REGISTRY: dict[str, DatasetRegistryEntry] = {e.name: e for e in (
    DatasetRegistryEntry("hamsterster", "hamsterster.edges", 2000, 16097,
                         "Hamsterster user friendships (networkrepository / KONECT)"),
    DatasetRegistryEntry("DCAM", "DCAM.edges", 2752, 68741,
                         "VKontakte community crawl, open profiles only (not public)"),
    DatasetRegistryEntry("facebook", "facebook.edges", 63392, 816886,
                         "Facebook friendships, 2009 snapshot"),
    DatasetRegistryEntry("slashdot", "slashdot.edges", 51083, 131175,
                         "Slashdot reply network"),
    DatasetRegistryEntry("github", "github.edges", 120865, 439858,
                         "GitHub user-project membership network"),
    DatasetRegistryEntry("dblp2010", "dblp2010.edges", 226413, 716460,
                         "DBLP co-authorship, 2010"),
)}


# ---------------------------------------------------------------------- config

def _split_list(value) -> list[str]:
    if isinstance(value, str):
        return [v.strip() for v in value.split(",") if v.strip()]
    return list(value)


_GEN_ARG = re.compile(r"[-+]?[\d.eE+-]+|\w+=[^,:/]*")


def _split_graphs(value) -> list[str]:
    # "gen:barbell:5,5,gen:path:4" -> two specs: bare numbers and key=value stick to the open gen spec
    out: list[str] = []
    for part in _split_list(value):
        if out and out[-1].startswith("gen:") and _GEN_ARG.fullmatch(part):
            out[-1] += "," + part
        else:
            out.append(part)
    return out


@dataclass
class ExperimentConfig:
    graphs: list[str]
    crawlers: list[str] = field(default_factory=lambda: list(CRAWLERS))
    measures: list[str] = field(default_factory=lambda: list(cent.MEASURES))
    p: float = 0.1
    seeds: int = 8
    master_seed: int = 0
    sample_edges: str = "closed-incident"
    betweenness: str = "exact"
    output_dir: str = "results"
    formats: list[str] = field(default_factory=lambda: ["csv", "json"])
    metrics: list[str] = field(default_factory=lambda: ["node_coverage", "target_closed"])
    resolution: int = 0
    workers: int = 1
    data_dir: str = "data"
    cache: bool = True

    def __post_init__(self):
        self.graphs = _split_graphs(self.graphs)
        for name in ("crawlers", "measures", "formats", "metrics"):
            setattr(self, name, _split_list(getattr(self, name)))
        self.validate()

    def validate(self) -> None:
        if not self.graphs:
            raise ConfigError("no graph given")
        if not self.crawlers:
            raise ConfigError("crawler list is empty")
        for c in self.crawlers:
            if c not in CRAWLERS:
                raise ConfigError(f"unknown crawler {c!r}; choose from {', '.join(CRAWLERS)}")
        for m in self.measures:
            if m not in cent.MEASURES:
                raise ConfigError(f"unknown measure {m!r}; choose from {', '.join(cent.MEASURES)}")
        for m in self.metrics:
            if m not in METRICS:
                raise ConfigError(f"unknown metric {m!r}; choose from {', '.join(METRICS)}")
        for f in self.formats:
            if f not in ("csv", "json"):
                raise ConfigError(f"unknown output format {f!r}")
        if not 0.0 < self.p <= 1.0:
            raise ConfigError(f"p must lie in (0, 1], got {self.p}")
        if self.seeds < 1:
            raise ConfigError("seed count must be at least 1")
        if self.sample_edges not in SAMPLE_EDGE_MODES:
            raise ConfigError(f"sample_edges must be one of {SAMPLE_EDGE_MODES}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.resolution < 0:
            raise ConfigError("resolution must be >= 0")
        self.betweenness_pivots  # validates the mode string

    @property
    def betweenness_pivots(self) -> int | None:
        mode = self.betweenness.strip()
        if mode == "exact":
            return None
        if mode.startswith("approx:"):
            try:
                k = int(mode.split(":", 1)[1])
            except ValueError:
                k = 0
            if k >= 1:
                return k
        raise ConfigError(f"betweenness must be 'exact' or 'approx:<pivots>', got {mode!r}")

    @classmethod
    def from_mapping(cls, values: Mapping[str, object]) -> "ExperimentConfig":
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            key = key.replace("-", "_")
            if key == "graph":
                key = "graphs"
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(known[key].type, raw, key)
        if "graphs" not in kwargs:
            raise ConfigError("config needs a 'graph' entry")
        try:
            return cls(**kwargs)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None


def _coerce(type_name: str, raw, key: str):
    if not isinstance(raw, str):
        return raw
    try:
        if type_name == "int":
            return int(raw)
        if type_name == "float":
            return float(raw)
        if type_name == "bool":
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None
    return raw


def read_config(path) -> dict[str, object]:
    """Parse a flat ``key = value`` file; ``#`` starts a comment.

    Repeated ``graph`` lines accumulate.
    """
    out: dict[str, object] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "graph":
            out.setdefault("graphs", []).append(value)
        elif key == "graphs":
            out.setdefault("graphs", []).extend(_split_graphs(value))
        else:
            out[key] = value
    return out


# ----------------------------------------------------------------------- seeds

def derive_seed(*parts) -> int:
    """Fold ``parts`` into a 64-bit integer seed."""
    digest = hashlib.sha256("\x1f".join(map(str, parts)).encode()).digest()
    return int.from_bytes(digest[:8], "little")


def choose_seed_nodes(g: Graph, count: int, master_seed: int) -> list[int]:
    rng = np.random.Generator(np.random.PCG64(derive_seed(master_seed, g.name, "seed-nodes")))
    nodes = rng.choice(g.node_count, size=count, replace=count > g.node_count)
    return [int(v) for v in nodes]


# ---------------------------------------------------------------------- graphs

def _parse_generator(spec: str) -> Graph:
    # gen:<kind>:<arg>,<arg>,...[,seed=<int>]
    try:
        _, kind, args = spec.split(":", 2)
    except ValueError:
        raise ConfigError(f"generator spec must look like gen:<kind>:<args>, got {spec!r}") from None
    params, seed = [], 0
    for a in _split_list(args):
        if a.startswith("seed="):
            seed = int(a[5:])
        elif "." in a:
            params.append(float(a))
        else:
            params.append(int(a))
    try:
        g = generate(kind, *params, rng=seed)
    except (GraphError, TypeError) as exc:
        raise ConfigError(f"bad generator spec {spec!r}: {exc}") from None
    g.name = spec[4:].replace(":", "-").replace(",", "_").replace("=", "")
    return g


def _resolve_path(source: str, data_dir: str) -> tuple[Path, str]:
    p = Path(source)
    if p.exists():
        return p, p.stem
    if source in REGISTRY:
        return Path(data_dir) / REGISTRY[source].filename, source
    raise DataError(f"graph source {source!r} is neither a file nor a registered dataset")


def load_graph(source: str, data_dir: str = "data") -> tuple[Graph, Path | None]:
    """Load a graph source and reduce it to its giant component.

    ``source`` is an edge-list path, a registry name looked up in
    ``data_dir``, or a generator spec such as ``gen:barbell:5,5`` or
    ``gen:preferential_attachment:2000,8,seed=42``.
    """
    if source.startswith("gen:"):
        g = _parse_generator(source)
        path = None
    else:
        path, name = _resolve_path(source, data_dir)
        try:
            with path.open() as fh:
                g = parse_edge_list(fh, name=name)
        except OSError as exc:
            raise DataError(f"cannot read {path}: {exc}") from None
        except GraphError as exc:
            raise DataError(f"{path}: {exc}") from None
    gc = giant_component(g)
    gc.name = g.name
    if gc.node_count != g.node_count:
        log.info("%s: giant component keeps %d of %d nodes", g.name, gc.node_count, g.node_count)
    return gc, path


def _file_digest(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()[:16]


def score_tables(g: Graph, measures: Sequence[str], source_path: Path | None = None,
                 betweenness_pivots: int | None = None, master_seed: int = 0,
                 cache: bool = True) -> dict[str, cent.ScoreTable]:
    """Compute (or load cached) score tables for ``measures``.

    Caches live next to the source file in ``<file>.netcrawl-cache/`` and are
    keyed by the file's content hash; generated graphs are never cached.
    """
    out: dict[str, cent.ScoreTable] = {}
    cache_dir = None
    if cache and source_path is not None:
        cache_dir = source_path.parent / f"{source_path.name}.netcrawl-cache"
        digest = _file_digest(source_path)
    for m in measures:
        tag = m
        if m == "betweenness" and betweenness_pivots is not None:
            tag = f"betweenness-approx{betweenness_pivots}-ms{master_seed}"
        cached = cache_dir / f"{digest}-{tag}.csv" if cache_dir is not None else None
        if cached is not None and cached.exists():
            with cached.open() as fh:
                out[m] = cent.read_scores_csv(fh, g)[m]
            continue
        rng = derive_seed(master_seed, g.name, "betweenness")
        out[m] = cent.compute_scores(g, m, betweenness_pivots, rng)
        if cached is not None:
            try:
                cache_dir.mkdir(exist_ok=True)
                tmp = cached.with_suffix(".tmp")
                with tmp.open("w") as fh:
                    cent.write_scores_csv([out[m]], g, fh)
                os.replace(tmp, cached)
            except OSError as exc:
                log.warning("could not write centrality cache %s: %s", cached, exc)
    return out


# --------------------------------------------------------------------- overlap

def emit_target_overlap(tables: Mapping[str, cent.ScoreTable] | Sequence[cent.ScoreTable],
                        p: float = 0.1) -> dict:
    """Sizes of pairwise and triple intersections of the top-p target sets."""
    if not isinstance(tables, Mapping):
        tables = {t.measure: t for t in tables}
    if len(tables) < 2:
        raise ValueError("overlap needs at least two measures")
    sizes = {len(t) for t in tables.values()}
    if len(sizes) != 1:
        raise ValueError("score tables come from graphs of different size")
    sets = {m: cent.build_target_set(t, p).members for m, t in tables.items()}
    names = list(sets)
    return {
        "fraction": p,
        "target_size": {m: len(s) for m, s in sets.items()},
        "pairwise": {f"{a}&{b}": len(sets[a] & sets[b]) for a, b in itertools.combinations(names, 2)},
        "triple": {"&".join(c): len(sets[c[0]] & sets[c[1]] & sets[c[2]])
                   for c in itertools.combinations(names, 3)},
    }


# ---------------------------------------------------------------------- verify

def verify_dataset(entry: DatasetRegistryEntry, path) -> dict:
    """Compare a local copy's giant component with the registered counts.

    A mismatch is reported (and logged as a warning), not raised, since
    public dataset versions drift.
    """
    path = Path(path)
    try:
        with path.open() as fh:
            g = parse_edge_list(fh, name=entry.name)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    except GraphError as exc:
        raise DataError(f"{path}: {exc}") from None
    gc = giant_component(g)
    report = {
        "name": entry.name,
        "path": str(path),
        "nodes": gc.node_count,
        "edges": gc.edge_count,
        "expected_nodes": entry.nodes,
        "expected_edges": entry.edges,
        "match": gc.node_count == entry.nodes and gc.edge_count == entry.edges,
    }
    if not report["match"]:
        log.warning("%s: giant component has %d nodes / %d edges, expected %d / %d",
                    entry.name, gc.node_count, gc.edge_count, entry.nodes, entry.edges)
    return report


# ------------------------------------------------------------------------- run

def _crawl_task(args) -> RunTrace:
    g, kind, seed_node, rng_seed, sample_edges = args
    return run_crawl(g, kind, seed_node, rng_seed=rng_seed, sample_edges=sample_edges)


def _fmt(x: float) -> str:
    return repr(float(x))


def _resolution_index(length: int, resolution: int) -> np.ndarray:
    if resolution <= 0 or resolution >= length:
        return np.arange(length)
    idx = np.unique(np.linspace(0, length - 1, resolution).round().astype(np.int64))
    return idx


def run_experiment(config: ExperimentConfig) -> dict:
    """Run every (graph, crawler, seed) crawl and write the result files.

    Returns the summary mapping (also written as ``summary.json``).
    """
    out_dir = Path(config.output_dir)
    loaded = [load_graph(src, config.data_dir) for src in config.graphs]
    names = [g.name for g, _ in loaded]
    if len(set(names)) != len(names):
        raise ConfigError(f"graph names must be unique, got {names}")

    summary: dict = {}
    overlaps: dict = {}
    auc_table: dict = {}
    csv_buf = io.StringIO()
    writer = csv.writer(csv_buf, lineterminator="\n")
    writer.writerow(["graph", "crawler", "seed", "metric", "measure", "iteration", "value"])
    target_metrics = [m for m in config.metrics if m != "node_coverage"]

    pool = ProcessPoolExecutor(config.workers) if config.workers > 1 else None
    try:
        for g, path in loaded:
            tables = score_tables(g, config.measures, path, config.betweenness_pivots,
                                  config.master_seed, config.cache)
            targets = {m: cent.build_target_set(t, config.p, g.node_count) for m, t in tables.items()}
            if len(tables) >= 2:
                overlaps[g.name] = emit_target_overlap(tables, config.p)
            seed_nodes = choose_seed_nodes(g, config.seeds, config.master_seed)
            tasks = [(g, kind, s, derive_seed(config.master_seed, g.name, kind, i), config.sample_edges)
                     for kind in config.crawlers for i, s in enumerate(seed_nodes)]
            runs = list(pool.map(_crawl_task, tasks)) if pool else [_crawl_task(t) for t in tasks]
            log.info("%s: %d crawls done", g.name, len(runs))

            summary[g.name] = {}
            auc_table[g.name] = {}
            it = iter(runs)
            for kind in config.crawlers:
                per_metric: dict[tuple[str, str], list[CoverageCurve]] = {}
                for i in range(config.seeds):
                    run = next(it)
                    curves = []
                    if "node_coverage" in config.metrics:
                        curves.append(node_coverage(run))
                    for m in config.measures:
                        for metric in target_metrics:
                            curves.append(target_coverage(run, targets[m], metric.split("_", 1)[1]))
                    for c in curves:
                        key = (c.kind, c.measure or "")
                        per_metric.setdefault(key, []).append(c)
                        idx = _resolution_index(len(c), config.resolution)
                        for j in idx.tolist():
                            writer.writerow([g.name, kind, i, c.kind, c.measure or "", j + 1, _fmt(c.values[j])])
                cell: dict = {}
                for (metric, measure), curves in per_metric.items():
                    mean = average_curves(curves)
                    label = "nodes" if metric == "node_coverage" else measure
                    if metric == "target_observed":
                        label = f"{measure}:observed"
                    cell[label] = {"auc": auc(mean), "final_value": mean.final}
                summary[g.name][kind] = cell
                auc_table[g.name][kind] = {k: v["auc"] for k, v in cell.items()}
    finally:
        if pool:
            pool.shutdown()

    tally = winner_tally(auc_table)
    out_dir.mkdir(parents=True, exist_ok=True)
    if "csv" in config.formats:
        (out_dir / "curves.csv").write_text(csv_buf.getvalue())
    if "json" in config.formats:
        _write_json(out_dir / "summary.json", summary)
        _write_json(out_dir / "winners.json", tally)
        _write_json(out_dir / "overlap.json", overlaps)
    return summary


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
