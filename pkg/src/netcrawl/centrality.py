"""Node influence measures and top-p target sets."""
from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, TextIO

import numpy as np

from .graph import Graph, GraphError, is_connected

__all__ = [
    "MEASURES",
    "ScoreTable",
    "TargetSet",
    "degree_scores",
    "coreness_scores",
    "betweenness_scores",
    "betweenness_approx",
    "eccentricity_scores",
    "compute_scores",
    "build_target_set",
    "write_scores_csv",
    "read_scores_csv",
]

MEASURES = ("degree", "coreness", "betweenness", "eccentricity")
# eccentricity targets are the nodes with the *lowest* value
MINIMIZED = frozenset({"eccentricity"})


@dataclass(frozen=True)
class ScoreTable:
    measure: str
    scores: np.ndarray

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise ValueError(f"unknown measure {self.measure!r}")

    def __len__(self) -> int:
        return len(self.scores)


@dataclass(frozen=True)
class TargetSet:
    measure: str
    fraction: float
    members: frozenset = field(repr=False)
    graph_size: int = 0

    @property
    def direction(self) -> str:
        return "minimize" if self.measure in MINIMIZED else "maximize"

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, v) -> bool:
        return v in self.members

    def mask(self) -> np.ndarray:
        m = np.zeros(self.graph_size, dtype=bool)
        m[list(self.members)] = True
        return m


def degree_scores(g: Graph) -> ScoreTable:
    return ScoreTable("degree", g.degrees.copy())


def coreness_scores(g: Graph) -> ScoreTable:
    """Core numbers by bucket-ordered peeling, O(|V| + |E|)."""
    n = g.node_count
    adj = g.adjacency
    deg = [len(a) for a in adj]
    maxdeg = max(deg, default=0)
    # bin[d] = start of the block of nodes with current degree d inside ``vert``
    counts = [0] * (maxdeg + 1)
    for d in deg:
        counts[d] += 1
    bin_start = [0] * (maxdeg + 1)
    start = 0
    for d in range(maxdeg + 1):
        bin_start[d] = start
        start += counts[d]
    pos = [0] * n
    vert = [0] * n
    fill = bin_start[:]
    for v in range(n):
        pos[v] = fill[deg[v]]
        vert[pos[v]] = v
        fill[deg[v]] += 1
    for i in range(n):
        v = vert[i]
        dv = deg[v]
        for u in adj[v]:
            du = deg[u]
            if du > dv:
                # swap u with the first node of its block, then shrink the block
                pu = pos[u]
                pw = bin_start[du]
                w = vert[pw]
                if u != w:
                    pos[u], pos[w] = pw, pu
                    vert[pu], vert[pw] = w, u
                bin_start[du] += 1
                deg[u] = du - 1
    return ScoreTable("coreness", np.asarray(deg, dtype=np.int64))


def _brandes_accumulate(adj, sources: Iterable[int], n: int) -> list[float]:
    bc = [0.0] * n
    for s in sources:
        sigma = [0] * n
        dist = [-1] * n
        sigma[s] = 1
        dist[s] = 0
        order = []
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            dv = dist[v] + 1
            sv = sigma[v]
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dv
                    queue.append(w)
                if dist[w] == dv:
                    sigma[w] += sv
        delta = [0.0] * n
        for w in reversed(order):
            dw = dist[w] - 1
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in adj[w]:
                if dist[v] == dw:
                    delta[v] += sigma[v] * coeff
            if w != s:
                bc[w] += delta[w]
    return bc


def betweenness_scores(g: Graph) -> ScoreTable:
    """Exact betweenness (Brandes).

    Unordered pairs are counted once, endpoints are excluded and nothing is
    normalised, so the middle of a three node path scores 1.
    """
    bc = _brandes_accumulate(g.adjacency, range(g.node_count), g.node_count)
    return ScoreTable("betweenness", np.asarray(bc) / 2.0)


def betweenness_approx(g: Graph, pivot_count: int, rng=None) -> ScoreTable:
    """Betweenness estimated from ``pivot_count`` uniformly drawn sources.

    Contributions are rescaled by ``|V| / pivot_count``; with every node as a
    pivot the result equals :func:`betweenness_scores`.
    """
    n = g.node_count
    if not 1 <= pivot_count <= n:
        raise ValueError(f"pivot_count must lie in [1, {n}], got {pivot_count}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.Generator(np.random.PCG64(rng))
    if pivot_count == n:
        pivots = range(n)
    else:
        pivots = sorted(rng.choice(n, size=pivot_count, replace=False).tolist())
    bc = _brandes_accumulate(g.adjacency, pivots, n)
    return ScoreTable("betweenness", np.asarray(bc) * (n / pivot_count) / 2.0)


def eccentricity_scores(g: Graph, chunk: int | None = None) -> ScoreTable:
    """Exact eccentricities from one breadth-first search per node."""
    from scipy.sparse.csgraph import shortest_path

    n = g.node_count
    if n == 0:
        raise GraphError("empty graph")
    if not is_connected(g):
        raise GraphError("eccentricity is infinite on a disconnected graph")
    if n == 1:
        return ScoreTable("eccentricity", np.zeros(1, dtype=np.int64))
    csr = g.csr
    # bound the dense distance block to ~160 MB
    chunk = chunk or max(1, min(512, 20_000_000 // n))
    ecc = np.empty(n, dtype=np.int64)
    for lo in range(0, n, chunk):
        idx = np.arange(lo, min(lo + chunk, n))
        d = shortest_path(csr, method="D", unweighted=True, directed=False, indices=idx)
        ecc[idx] = d.max(axis=1).astype(np.int64)
    return ScoreTable("eccentricity", ecc)


def compute_scores(g: Graph, measure: str, betweenness_pivots: int | None = None, rng=None) -> ScoreTable:
    if measure == "degree":
        return degree_scores(g)
    if measure == "coreness":
        return coreness_scores(g)
    if measure == "betweenness":
        if betweenness_pivots is None:
            return betweenness_scores(g)
        return betweenness_approx(g, min(betweenness_pivots, g.node_count), rng)
    if measure == "eccentricity":
        return eccentricity_scores(g)
    raise ValueError(f"unknown measure {measure!r}; choose from {MEASURES}")


def build_target_set(scores: ScoreTable, p: float = 0.1, graph_size: int | None = None) -> TargetSet:
    """Top ``ceil(p * |V|)`` nodes by score; ascending node id breaks ties."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    n = len(scores.scores)
    if n == 0:
        raise ValueError("empty score table")
    if graph_size is not None and graph_size != n:
        raise ValueError(f"score table has {n} entries but the graph has {graph_size} nodes")
    # round away float noise such as 0.1 * 20 = 2.0000000000000004
    k = math.ceil(round(p * n, 9))
    key = scores.scores if scores.measure in MINIMIZED else -np.asarray(scores.scores, dtype=float)
    order = np.lexsort((np.arange(n), key))
    return TargetSet(scores.measure, p, frozenset(order[:k].tolist()), n)


def write_scores_csv(tables: Iterable[ScoreTable], g: Graph, fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["node_label", "measure", "score"])
    for t in tables:
        for v, s in enumerate(t.scores.tolist()):
            w.writerow([g.label(v), t.measure, repr(s) if isinstance(s, float) else s])


def read_scores_csv(fh: TextIO, g: Graph) -> dict[str, ScoreTable]:
    index = {str(lab): v for v, lab in enumerate(g.labels)}
    raw: dict[str, dict[int, float]] = {}
    for row in csv.DictReader(fh):
        raw.setdefault(row["measure"], {})[index[row["node_label"]]] = float(row["score"])
    out = {}
    for measure, vals in raw.items():
        if len(vals) != g.node_count:
            raise ValueError(f"{measure}: {len(vals)} scores for {g.node_count} nodes")
        arr = np.array([vals[v] for v in range(g.node_count)])
        if measure != "betweenness":
            arr = arr.astype(np.int64)
        out[measure] = ScoreTable(measure, arr)
    return out
