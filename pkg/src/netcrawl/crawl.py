"""Crawl state machine and frontier strategies.

A crawl starts with a single observed seed. Each *query* closes one observed
node and reveals its neighbours; a strategy decides which observed node to
query next. One query is one unit of budget: random-walk hops through
already closed nodes and all bookkeeping are free.

Randomness comes from numpy's ``PCG64`` bit generator, so a fixed
``rng_seed`` reproduces the same trace on every platform.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from sortedcontainers import SortedList

from .graph import Graph, GraphError

__all__ = [
    "CRAWLERS",
    "SAMPLE_EDGE_MODES",
    "CrawlError",
    "EmptyFrontierError",
    "CrawlState",
    "Crawler",
    "RandomCrawler",
    "RandomWalkCrawler",
    "DFSCrawler",
    "BFSCrawler",
    "MODCrawler",
    "DECrawler",
    "RunTrace",
    "make_rng",
    "start",
    "make_crawler",
    "run_crawl",
]

SAMPLE_EDGE_MODES = ("closed-incident", "induced")


class CrawlError(RuntimeError):
    pass


class EmptyFrontierError(CrawlError):
    pass


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


class _Uniform:
    """Buffered uniform integer draws from a numpy generator."""

    def __init__(self, rng: np.random.Generator, block: int = 1024):
        self._rng = rng
        self._block = block
        self._buf: list[float] = []
        self._i = 0

    def below(self, n: int) -> int:
        if self._i >= len(self._buf):
            self._buf = self._rng.random(self._block).tolist()
            self._i = 0
        u = self._buf[self._i]
        self._i += 1
        k = int(u * n)
        return k if k < n else n - 1


class CrawlState:
    """What the crawler knows after some number of queries.

    ``closed`` holds queried nodes, ``observed`` the frontier (seen but not
    queried) and ``sample_adj`` the sample graph restricted to ``closed |
    observed``. With ``sample_edges="closed-incident"`` the sample holds the
    edges with at least one closed endpoint, which is all a query model can
    reveal; ``"induced"`` also adds edges between two observed nodes.
    """

    def __init__(self, g: Graph, seed: int, sample_edges: str = "closed-incident"):
        if not 0 <= seed < g.node_count:
            raise CrawlError(f"seed {seed} out of range for {g.node_count} nodes")
        if sample_edges not in SAMPLE_EDGE_MODES:
            raise CrawlError(f"unknown sample edge mode {sample_edges!r}")
        self.graph = g
        self.seed = seed
        self.sample_edges = sample_edges
        self.closed: set[int] = set()
        self.observed: set[int] = {seed}
        self.sample_adj: list[set[int]] = [set() for _ in range(g.node_count)]
        self.trace: list[int] = []
        # iteration at which each node entered the sample; -1 while unseen
        self._disc = [-1] * g.node_count
        self._disc[seed] = 0
        self.last_new_edges: list[tuple[int, int]] = []

    @property
    def iteration(self) -> int:
        return len(self.trace)

    @property
    def discovered_at(self) -> np.ndarray:
        return np.asarray(self._disc, dtype=np.int64)

    @property
    def sample_nodes(self) -> set[int]:
        return self.closed | self.observed

    def seen(self, v: int) -> bool:
        return self._disc[v] >= 0

    def sample_degree(self, v: int) -> int:
        return len(self.sample_adj[v])

    def sample_edge_count(self) -> int:
        return sum(len(a) for a in self.sample_adj) // 2

    def sample_clustering(self, v: int) -> float:
        nbrs = self.sample_adj[v]
        d = len(nbrs)
        if d < 2:
            return 0.0
        adj = self.sample_adj
        links = sum(len(adj[u] & nbrs) for u in nbrs) // 2
        return 2.0 * links / (d * (d - 1))

    def query(self, v: int) -> list[int]:
        """Close ``v`` and return the newly observed nodes in ascending order."""
        if v not in self.observed:
            state = "closed" if v in self.closed else "not observed"
            raise CrawlError(f"cannot query node {v}: {state}")
        g = self.graph
        adj = self.sample_adj
        self.observed.remove(v)
        self.closed.add(v)
        self.trace.append(v)
        it = len(self.trace)
        disc = self._disc
        new = [u for u in g.neighbors(v) if disc[u] < 0]
        for u in new:
            disc[u] = it
        self.observed.update(new)
        new_edges = []
        av = adj[v]
        for u in g.neighbors(v):
            if u not in av:
                av.add(u)
                adj[u].add(v)
                new_edges.append((v, u))
        if self.sample_edges == "induced":
            for w in new:
                aw = adj[w]
                for x in g.neighbors(w):
                    if disc[x] >= 0 and x not in aw:
                        aw.add(x)
                        adj[x].add(w)
                        new_edges.append((w, x))
        self.last_new_edges = new_edges
        return new

    def check_invariants(self) -> None:
        """Full scan of the state contracts; raises ``AssertionError``."""
        g = self.graph
        assert self.closed.isdisjoint(self.observed), "closed and observed overlap"
        assert len(self.closed) == len(self.trace) == len(set(self.trace)), "trace out of sync"
        nodes = self.closed | self.observed
        for v in self.closed:
            assert self.sample_adj[v] == g.neighbor_sets[v], f"closed node {v} lacks edges"
            assert g.neighbor_sets[v] <= nodes, f"neighbour of closed node {v} unseen"
        for v in nodes:
            assert len(self.sample_adj[v]) <= g.degree(v)
            assert self.sample_adj[v] <= nodes
        if self.sample_edges == "closed-incident":
            for v in self.observed:
                assert self.sample_adj[v] <= self.closed, f"observed-observed edge at {v}"


def start(g: Graph, seed: int, sample_edges: str = "closed-incident") -> CrawlState:
    return CrawlState(g, seed, sample_edges)


# ------------------------------------------------------------------ strategies

class Crawler:
    """Frontier policy. Subclasses implement :meth:`select`.

    :meth:`update` is called after every query with the queried node and the
    nodes it revealed, so policies can maintain private frontier structures.
    """

    kind = ""

    def __init__(self, state: CrawlState, rng=None):
        self.state = state
        self.rng = make_rng(rng)
        self._uniform = _Uniform(self.rng)

    def select(self) -> int:
        raise NotImplementedError

    def update(self, v: int, new: Sequence[int]) -> None:
        pass

    def _require_frontier(self):
        if not self.state.observed:
            raise EmptyFrontierError("no observed node left to query")


class RandomCrawler(Crawler):
    """Uniformly random member of the frontier."""

    kind = "RC"

    def __init__(self, state, rng=None):
        super().__init__(state, rng)
        self._items = sorted(state.observed)
        self._pos = {v: i for i, v in enumerate(self._items)}

    def select(self) -> int:
        self._require_frontier()
        return self._items[self._uniform.below(len(self._items))]

    def update(self, v, new):
        i = self._pos.pop(v)
        last = self._items.pop()
        if last != v:
            self._items[i] = last
            self._pos[last] = i
        for u in new:
            self._pos[u] = len(self._items)
            self._items.append(u)


class RandomWalkCrawler(Crawler):
    """Random walk that passes through closed nodes for free.

    From the last queried node the walk moves to uniform sample neighbours
    until it steps on an observed node, which is returned.
    """

    kind = "RW"

    def __init__(self, state, rng=None, max_hops: int = 10**8):
        super().__init__(state, rng)
        self.max_hops = max_hops
        self.position: int | None = None
        self.hops = 0

    def select(self) -> int:
        self._require_frontier()
        st = self.state
        if self.position is None:
            items = sorted(st.observed)
            return items[self._uniform.below(len(items))]
        adj = st.graph.adjacency
        observed = st.observed
        below = self._uniform.below
        cur = self.position
        for _ in range(self.max_hops):
            nbrs = adj[cur]
            cur = nbrs[below(len(nbrs))]
            self.hops += 1
            if cur in observed:
                return cur
        raise CrawlError(f"random walk exceeded {self.max_hops} hops")

    def update(self, v, new):
        self.position = v


class DFSCrawler(Crawler):
    kind = "DFS"

    def __init__(self, state, rng=None):
        super().__init__(state, rng)
        self._stack = sorted(state.observed, reverse=True)

    def select(self) -> int:
        self._require_frontier()
        observed = self.state.observed
        while self._stack:
            v = self._stack.pop()
            if v in observed:
                return v
        raise CrawlError("DFS stack exhausted while frontier is non-empty")

    def update(self, v, new):
        # ascending insertion: the largest new id ends on top of the stack
        self._stack.extend(new)


class BFSCrawler(Crawler):
    kind = "BFS"

    def __init__(self, state, rng=None):
        super().__init__(state, rng)
        self._queue = deque(sorted(state.observed))

    def select(self) -> int:
        self._require_frontier()
        observed = self.state.observed
        while self._queue:
            v = self._queue.popleft()
            if v in observed:
                return v
        raise CrawlError("BFS queue exhausted while frontier is non-empty")

    def update(self, v, new):
        self._queue.extend(new)


class _DegreeFrontier:
    """Frontier kept sorted by ``(sample degree, node id)``.

    Every degree change costs one removal and one insertion in a
    ``SortedList``, i.e. ``O(log |frontier|)``.
    """

    def __init__(self, state: CrawlState):
        self.state = state
        self.keys: dict[int, int] = {}
        self.sorted = SortedList()
        self.degree_sum = 0
        for v in state.observed:
            self._add(v)

    def _add(self, v):
        d = self.state.sample_degree(v)
        self.keys[v] = d
        self.sorted.add((d, v))
        self.degree_sum += d

    def update(self, v, new):
        st = self.state
        keys = self.keys
        d = keys.pop(v)
        self.sorted.remove((d, v))
        self.degree_sum -= d
        for u in new:
            self._add(u)
        touched = {x for e in st.last_new_edges for x in e if x in keys}
        for x in touched:
            old = keys[x]
            nd = st.sample_degree(x)
            if nd != old:
                self.sorted.remove((old, x))
                self.sorted.add((nd, x))
                keys[x] = nd
                self.degree_sum += nd - old

    def __len__(self):
        return len(self.sorted)


class MODCrawler(Crawler):
    """Maximum observed degree; ascending id breaks ties."""

    kind = "MOD"

    def __init__(self, state, rng=None):
        super().__init__(state, rng)
        self.keys = {v: state.sample_degree(v) for v in state.observed}
        # negated degree so the first entry is the answer
        self.sorted = SortedList((-d, v) for v, d in self.keys.items())

    def select(self) -> int:
        self._require_frontier()
        return self.sorted[0][1]

    def update(self, v, new):
        st = self.state
        keys = self.keys
        self.sorted.remove((-keys.pop(v), v))
        for u in new:
            d = st.sample_degree(u)
            keys[u] = d
            self.sorted.add((-d, u))
        for e in st.last_new_edges:
            for x in e:
                old = keys.get(x)
                if old is None:
                    continue
                nd = st.sample_degree(x)
                if nd != old:
                    self.sorted.remove((-old, x))
                    self.sorted.add((-nd, x))
                    keys[x] = nd


EXPANSION = "expansion"
DENSIFICATION = "densification"


class DECrawler(Crawler):
    """Densification-Expansion crawler.

    The frontier is ordered by sample degree. In *expansion* mode the next
    node is a uniform pick among the bottom 80% of the frontier. In
    *densification* mode every node of the top 20% is scored by::

        phi(v) = deg(v, S) / mean frontier degree * (1 - clust(v, S))

    and the best score wins (ascending id on ties); high degree with low
    clustering marks a hub.

    Modes switch on yield, the number of new nodes a query reveals. Each mode
    keeps an exponentially weighted average of its yield, both seeded with the
    yield of the seed query. The crawl begins in expansion and runs bursts of
    at least ``min_burst`` queries; at the end of a burst it switches when
    the current average drops below ``switch_ratio`` times the other one.
    """

    kind = "DE"

    def __init__(self, state, rng=None, top_fraction: float = 0.2, decay: float = 0.5,
                 min_burst: int = 10, switch_ratio: float = 0.5):
        super().__init__(state, rng)
        if not 0.0 < top_fraction < 1.0:
            raise ValueError("top_fraction must lie in (0, 1)")
        if not 0.0 <= decay < 1.0:
            raise ValueError("decay must lie in [0, 1)")
        if min_burst < 1:
            raise ValueError("min_burst must be at least 1")
        self.top_fraction = top_fraction
        self.decay = decay
        self.min_burst = min_burst
        self.switch_ratio = switch_ratio
        self.frontier = _DegreeFrontier(state)
        self.mode = EXPANSION
        self.averages: dict[str, float] | None = None
        self.burst = 0
        self.mode_history: list[str] = []
        self._clust: dict[int, float] = {}

    def _split(self) -> int:
        """Size of the densification candidate block at the top."""
        n = len(self.frontier)
        return max(1, int(n * self.top_fraction + 1e-9))

    def phi(self, v: int) -> float:
        n = len(self.frontier)
        mean = self.frontier.degree_sum / n if n else 0.0
        if mean == 0.0:
            return 0.0
        return self.state.sample_degree(v) / mean * (1.0 - self.clustering(v))

    def clustering(self, v: int) -> float:
        c = self._clust.get(v)
        if c is None:
            c = self._clust[v] = self.state.sample_clustering(v)
        return c

    def select(self) -> int:
        self._require_frontier()
        frontier = self.frontier.sorted
        n = len(frontier)
        top = self._split()
        if self.mode == DENSIFICATION:
            best, best_score = -1, -1.0
            for _, v in frontier.islice(n - top, n):
                score = self.phi(v)
                if score > best_score or (score == best_score and v < best):
                    best, best_score = v, score
            return best
        bottom = max(1, n - top)
        return frontier[self._uniform.below(bottom)][1]

    def update(self, v, new):
        st = self.state
        self.frontier.update(v, new)
        self._invalidate(st.last_new_edges)
        self._clust.pop(v, None)
        self.mode_history.append(self.mode)
        gained = float(len(new))
        if self.averages is None:
            self.averages = {EXPANSION: gained, DENSIFICATION: gained}
        else:
            a = self.averages
            a[self.mode] = self.decay * a[self.mode] + (1.0 - self.decay) * gained
        self.burst += 1
        if self.burst >= self.min_burst:
            self.burst = 0
            other = DENSIFICATION if self.mode == EXPANSION else EXPANSION
            if self.averages[self.mode] < self.switch_ratio * self.averages[other]:
                self.mode = other

    def _invalidate(self, edges):
        # clust(x) changes when x gains a neighbour or two neighbours of x get linked
        if not self._clust:
            return
        adj = self.state.sample_adj
        cache = self._clust
        for a, b in edges:
            cache.pop(a, None)
            cache.pop(b, None)
            na, nb = adj[a], adj[b]
            small, large = (na, nb) if len(na) <= len(nb) else (nb, na)
            for x in small:
                if x in cache and x in large:
                    del cache[x]


CRAWLERS: dict[str, type[Crawler]] = {
    c.kind: c for c in (RandomCrawler, RandomWalkCrawler, DFSCrawler, BFSCrawler, MODCrawler, DECrawler)
}


def make_crawler(kind: str, state: CrawlState, rng=None, **params) -> Crawler:
    try:
        cls = CRAWLERS[kind]
    except KeyError:
        raise CrawlError(f"unknown crawler {kind!r}; choose from {list(CRAWLERS)}") from None
    return cls(state, rng, **params)


# ------------------------------------------------------------------------ runs

@dataclass
class RunTrace:
    """Outcome of one crawl.

    ``trace[i]`` is the node queried at iteration ``i + 1`` and
    ``discovered_at[v]`` the iteration after which ``v`` was first seen (0
    for the seed). Coverage curves follow from these two arrays alone.
    """

    graph: str
    kind: str
    seed: int
    rng_seed: int | None
    node_count: int
    trace: np.ndarray
    discovered_at: np.ndarray
    extra: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.trace)

    @property
    def closed_at(self) -> np.ndarray:
        """Iteration at which each node was queried; -1 if never."""
        out = np.full(self.node_count, -1, dtype=np.int64)
        out[self.trace] = np.arange(1, len(self.trace) + 1)
        return out

    def labels(self, g: Graph) -> list:
        return [g.label(int(v)) for v in self.trace]


Observer = Callable[[CrawlState, int, list], None]


def run_crawl(g: Graph, kind: str, seed: int, rng_seed=None, observers: Iterable[Observer] = (),
              sample_edges: str = "closed-incident", budget: int | None = None,
              check: bool = False, **params) -> RunTrace:
    """Crawl ``g`` from ``seed`` with strategy ``kind``.

    The loop runs select and query until the frontier is empty (or ``budget``
    queries were made). Each observer is called as ``obs(state, v, new)``
    after every query. ``check=True`` verifies the state invariants after
    every step, which costs a full scan per query.
    """
    if not g.connected:
        raise GraphError("crawling needs a connected graph; use giant_component first")
    state = start(g, seed, sample_edges)
    crawler = make_crawler(kind, state, rng_seed, **params)
    observers = list(observers)
    limit = g.node_count if budget is None else min(budget, g.node_count)
    while state.observed and state.iteration < limit:
        v = crawler.select()
        new = state.query(v)
        crawler.update(v, new)
        if check:
            state.check_invariants()
        for obs in observers:
            obs(state, v, new)
    extra = {}
    if isinstance(crawler, RandomWalkCrawler):
        extra["walk_hops"] = crawler.hops
    if isinstance(crawler, DECrawler):
        extra["modes"] = crawler.mode_history
    if not isinstance(rng_seed, (int, np.integer)):
        rng_seed = None
    return RunTrace(g.name, kind, seed, rng_seed, g.node_count,
                    np.asarray(state.trace, dtype=np.int64), state.discovered_at, extra)
