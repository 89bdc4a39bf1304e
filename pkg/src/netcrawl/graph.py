"""Undirected simple graphs with dense integer ids.

Nodes are ``0 .. node_count - 1``; the labels found in an input file are kept
in :attr:`Graph.labels` so results can be reported in the original naming.
"""
from __future__ import annotations

import io
from bisect import bisect_left
from collections import deque
from functools import cached_property
from typing import Hashable, Iterable, Sequence, TextIO

import numpy as np

__all__ = [
    "Graph",
    "GraphError",
    "ParseError",
    "parse_edge_list",
    "read_edge_list",
    "serialize_edge_list",
    "giant_component",
    "is_connected",
    "relabel",
    "local_clustering",
    "generate",
    "path_graph",
    "star_graph",
    "clique_graph",
    "barbell_graph",
    "erdos_renyi_graph",
    "preferential_attachment_graph",
]


class GraphError(ValueError):
    pass


class ParseError(GraphError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class Graph:
    """Immutable undirected simple graph.

    Parameters
    ----------
    adjacency : sequence of iterables
        ``adjacency[v]`` lists the neighbours of ``v``. Must be symmetric and
        free of self-loops; duplicates are not allowed.
    labels : sequence, optional
        External label of every node. Defaults to the node ids themselves.
    name : str, optional
        Used in reports and result files.
    """

    __slots__ = ("_adj", "_labels", "name", "edge_count", "__dict__")

    def __init__(self, adjacency: Sequence[Iterable[int]], labels: Sequence[Hashable] | None = None,
                 name: str = "graph"):
        adj = tuple(tuple(sorted(nbrs)) for nbrs in adjacency)
        n = len(adj)
        total = 0
        for v, nbrs in enumerate(adj):
            for i, u in enumerate(nbrs):
                if u == v:
                    raise GraphError(f"self-loop at node {v}")
                if not 0 <= u < n:
                    raise GraphError(f"neighbour {u} of node {v} out of range")
                if i and nbrs[i - 1] == u:
                    raise GraphError(f"duplicate neighbour {u} of node {v}")
            total += len(nbrs)
        for v, nbrs in enumerate(adj):
            for u in nbrs:
                if not _sorted_contains(adj[u], v):
                    raise GraphError(f"edge ({v}, {u}) is not symmetric")
        if labels is not None and len(labels) != n:
            raise GraphError("labels must have one entry per node")
        self._adj = adj
        self._labels = tuple(labels) if labels is not None else None
        self.name = name
        self.edge_count = total // 2

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[tuple[int, int]], labels=None,
                   name: str = "graph") -> "Graph":
        """Build a graph from an edge iterable, dropping loops and duplicates."""
        nbrs: list[set[int]] = [set() for _ in range(node_count)]
        for u, v in edges:
            if u == v:
                continue
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(nbrs, labels=labels, name=name)

    @property
    def node_count(self) -> int:
        return len(self._adj)

    def __len__(self) -> int:
        return len(self._adj)

    @property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        return self._adj

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def has_edge(self, u: int, v: int) -> bool:
        return _sorted_contains(self._adj[u], v)

    @property
    def labels(self) -> tuple:
        if self._labels is None:
            return tuple(range(self.node_count))
        return self._labels

    @property
    def label_map(self) -> dict:
        """External label -> internal id."""
        return {label: i for i, label in enumerate(self.labels)}

    def label(self, v: int):
        return v if self._labels is None else self._labels[v]

    def edges(self):
        for v, nbrs in enumerate(self._adj):
            for u in nbrs:
                if v < u:
                    yield v, u

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.fromiter((len(a) for a in self._adj), dtype=np.int64, count=self.node_count)

    @cached_property
    def connected(self) -> bool:
        return self.node_count > 0 and len(_components(self)) == 1

    @cached_property
    def neighbor_sets(self) -> tuple[frozenset, ...]:
        return tuple(frozenset(a) for a in self._adj)

    @cached_property
    def csr(self):
        """Adjacency as a ``scipy.sparse.csr_matrix`` of ones."""
        from scipy.sparse import csr_matrix

        indptr = np.zeros(self.node_count + 1, dtype=np.int64)
        np.cumsum(self.degrees, out=indptr[1:])
        indices = np.fromiter((u for a in self._adj for u in a), dtype=np.int32, count=int(indptr[-1]))
        data = np.ones(len(indices), dtype=np.int8)
        return csr_matrix((data, indices, indptr), shape=(self.node_count, self.node_count))

    def subgraph(self, nodes: Iterable[int], name: str | None = None) -> "Graph":
        """Induced subgraph; node order follows ``sorted(nodes)``."""
        keep = sorted(set(nodes))
        index = {v: i for i, v in enumerate(keep)}
        adj = [[index[u] for u in self._adj[v] if u in index] for v in keep]
        labels = [self.label(v) for v in keep]
        return Graph(adj, labels=labels, name=self.name if name is None else name)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._adj == other._adj and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(self._adj)

    def __repr__(self) -> str:
        return f"Graph(name={self.name!r}, nodes={self.node_count}, edges={self.edge_count})"


def _sorted_contains(seq: Sequence[int], x: int) -> bool:
    i = bisect_left(seq, x)
    return i < len(seq) and seq[i] == x


# --------------------------------------------------------------------------- I/O

def parse_edge_list(stream: TextIO | Iterable[str] | str, name: str = "graph") -> Graph:
    """Parse a whitespace separated edge list.

    Lines starting with ``#`` or ``%`` are comments and blank lines are
    skipped. Every other line must hold exactly two labels. Ids are assigned
    in order of first appearance; self-loops and repeated edges are dropped.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    ids: dict[str, int] = {}
    edges: list[tuple[int, int]] = []
    for lineno, line in enumerate(stream, start=1):
        s = line.strip()
        if not s or s[0] in "#%":
            continue
        tokens = s.split()
        if len(tokens) != 2:
            raise ParseError(f"expected 2 node labels, got {len(tokens)}", lineno)
        a, b = tokens
        u = ids.setdefault(a, len(ids))
        v = ids.setdefault(b, len(ids))
        edges.append((u, v))
    if not ids:
        raise ParseError("edge list is empty")
    return Graph.from_edges(len(ids), edges, labels=list(ids), name=name)


def read_edge_list(path, name: str | None = None) -> Graph:
    from pathlib import Path

    path = Path(path)
    with path.open() as fh:
        return parse_edge_list(fh, name=name or path.stem)


def serialize_edge_list(g: Graph) -> str:
    return "".join(f"{g.label(u)} {g.label(v)}\n" for u, v in g.edges())


# --------------------------------------------------------------------- structure

def _components(g: Graph) -> list[list[int]]:
    seen = bytearray(g.node_count)
    comps = []
    for s in range(g.node_count):
        if seen[s]:
            continue
        seen[s] = 1
        comp = [s]
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for u in g.neighbors(v):
                if not seen[u]:
                    seen[u] = 1
                    comp.append(u)
                    queue.append(u)
        comps.append(comp)
    return comps


def is_connected(g: Graph) -> bool:
    return g.connected


def giant_component(g: Graph) -> Graph:
    """Induced subgraph on the largest connected component.

    Ties between equally large components go to the one holding the smallest
    node id. Labels are carried over, so ``label_map`` of the result maps the
    original labels onto the new compact ids.
    """
    if g.node_count == 0:
        raise GraphError("empty graph has no giant component")
    # components come out ordered by their smallest id
    best = max(_components(g), key=len)
    if len(best) == g.node_count:
        return g
    return g.subgraph(best)


def relabel(g: Graph, permutation: Sequence[int] | None = None, rng=None) -> Graph:
    """Isomorphic copy where node ``v`` becomes ``permutation[v]``.

    With no permutation a uniform one is drawn from ``rng``. Labels travel
    with their nodes.
    """
    n = g.node_count
    if permutation is None:
        permutation = _as_rng(rng).permutation(n).tolist()
    perm = [int(x) for x in permutation]
    if sorted(perm) != list(range(n)):
        raise GraphError("not a permutation of the node ids")
    adj: list[list[int]] = [[] for _ in range(n)]
    labels: list = [None] * n
    for v in range(n):
        adj[perm[v]] = [perm[u] for u in g.neighbors(v)]
        labels[perm[v]] = g.label(v)
    return Graph(adj, labels=labels, name=g.name)


def local_clustering(g: Graph, v: int) -> float:
    """Local clustering coefficient of ``v``; zero when ``deg(v) < 2``."""
    if not 0 <= v < g.node_count:
        raise GraphError(f"node {v} out of range")
    nbrs = g.neighbors(v)
    d = len(nbrs)
    if d < 2:
        return 0.0
    sets = g.neighbor_sets
    nset = sets[v]
    links = sum(len(sets[u] & nset) for u in nbrs) // 2
    return 2.0 * links / (d * (d - 1))


# -------------------------------------------------------------------- generators

def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.Generator(np.random.PCG64(rng))


def path_graph(n: int) -> Graph:
    if n < 1:
        raise GraphError("path needs at least one node")
    return Graph.from_edges(n, ((i, i + 1) for i in range(n - 1)), name=f"path{n}")


def star_graph(n: int) -> Graph:
    """Star on ``n`` nodes in total; node 0 is the centre."""
    if n < 1:
        raise GraphError("star needs at least one node")
    return Graph.from_edges(n, ((0, i) for i in range(1, n)), name=f"star{n}")


def clique_graph(n: int) -> Graph:
    if n < 1:
        raise GraphError("clique needs at least one node")
    return Graph.from_edges(n, ((i, j) for i in range(n) for j in range(i + 1, n)), name=f"clique{n}")


def barbell_graph(a: int, b: int) -> Graph:
    """Cliques on ``0..a-1`` and ``a..a+b-1`` joined by the bridge ``(a-1, a)``."""
    if a < 1 or b < 1:
        raise GraphError("barbell cliques need at least one node each")
    edges = [(i, j) for i in range(a) for j in range(i + 1, a)]
    edges += [(a + i, a + j) for i in range(b) for j in range(i + 1, b)]
    edges.append((a - 1, a))
    return Graph.from_edges(a + b, edges, name=f"barbell{a}_{b}")


def erdos_renyi_graph(n: int, p: float, rng=None, connected: str = "retry", max_tries: int = 1000) -> Graph:
    """G(n, p) random graph.

    ``connected`` selects how disconnected draws are handled: ``"retry"``
    redraws until connected (up to ``max_tries``), ``"giant"`` returns the
    giant component of the first draw and ``"none"`` returns the draw as is.
    """
    if n < 1:
        raise GraphError("erdos_renyi needs at least one node")
    if not 0.0 <= p <= 1.0:
        raise GraphError("p must lie in [0, 1]")
    if connected not in ("retry", "giant", "none"):
        raise GraphError(f"unknown connectivity handling {connected!r}")
    rng = _as_rng(rng)
    iu, ju = np.triu_indices(n, k=1)
    for _ in range(max_tries):
        mask = rng.random(len(iu)) < p
        g = Graph.from_edges(n, zip(iu[mask].tolist(), ju[mask].tolist()), name=f"er{n}_{p:g}")
        if connected == "none":
            return g
        if connected == "giant":
            return giant_component(g)
        if is_connected(g):
            return g
    raise GraphError(f"no connected G({n}, {p}) draw in {max_tries} tries")


def preferential_attachment_graph(n: int, m: int, rng=None) -> Graph:
    """Barabasi-Albert graph.

    Starts from a clique on ``m + 1`` nodes; every later node links to ``m``
    distinct existing nodes picked with probability proportional to degree.
    """
    if m < 1:
        raise GraphError("m must be at least 1")
    if n < m + 1:
        raise GraphError("preferential attachment needs n > m")
    rng = _as_rng(rng)
    edges = [(i, j) for i in range(m + 1) for j in range(i + 1, m + 1)]
    # every node appears once per incident edge end
    ends = [v for e in edges for v in e]
    for v in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(ends[int(rng.integers(len(ends)))])
        for t in sorted(targets):
            edges.append((v, t))
            ends.append(v)
            ends.append(t)
    return Graph.from_edges(n, edges, name=f"pa{n}_{m}")


_KINDS = {
    "path": path_graph,
    "star": star_graph,
    "clique": clique_graph,
    "barbell": barbell_graph,
    "erdos_renyi": erdos_renyi_graph,
    "preferential_attachment": preferential_attachment_graph,
}
_RANDOM_KINDS = {"erdos_renyi", "preferential_attachment"}


def generate(kind: str, *params, rng=None, **kwargs) -> Graph:
    """Dispatch to one of the named generators.

    >>> generate("barbell", 5, 5).edge_count
    21
    """
    try:
        fn = _KINDS[kind]
    except KeyError:
        raise GraphError(f"unknown graph kind {kind!r}; choose from {sorted(_KINDS)}") from None
    if kind in _RANDOM_KINDS:
        return fn(*params, rng=rng, **kwargs)
    return fn(*params, **kwargs)
