import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netcrawl.crawl import (
    CRAWLERS,
    DENSIFICATION,
    EXPANSION,
    BFSCrawler,
    CrawlError,
    DECrawler,
    DFSCrawler,
    EmptyFrontierError,
    MODCrawler,
    RandomCrawler,
    RandomWalkCrawler,
    make_crawler,
    run_crawl,
    start,
)
from netcrawl.graph import Graph, GraphError, barbell_graph, clique_graph, path_graph, star_graph
from oracles import random_connected_graph


def test_start_state(star5):
    st_ = start(star5, 0)
    assert st_.observed == {0} and st_.closed == set() and st_.iteration == 0
    assert st_.sample_edge_count() == 0
    with pytest.raises(CrawlError):
        start(star5, 5)


def test_query_seed_reveals_neighbours(path3):
    s = start(path3, 1)
    assert s.query(1) == [0, 2]
    assert s.closed == {1} and s.observed == {0, 2}
    assert len(s.sample_nodes) == 3 and s.sample_edge_count() == 2
    assert s.trace == [1] and s.iteration == 1


def test_query_star_from_leaf(star5):
    s = start(star5, 1)
    assert s.query(1) == [0]
    assert s.query(0) == [2, 3, 4]


def test_query_clique():
    s = start(clique_graph(4), 2)
    assert len(s.query(2)) == 3
    assert s.query(0) == []


def test_query_contract_violations(path3):
    s = start(path3, 0)
    with pytest.raises(CrawlError):
        s.query(2)
    s.query(0)
    with pytest.raises(CrawlError):
        s.query(0)


def test_induced_sample_edges():
    # triangle 0-1-2; querying 0 observes 1 and 2, whose mutual edge is only in the induced sample
    g = clique_graph(3)
    a = start(g, 0)
    a.query(0)
    assert a.sample_edge_count() == 2
    b = start(g, 0, sample_edges="induced")
    b.query(0)
    assert b.sample_edge_count() == 3
    b.check_invariants()
    with pytest.raises(CrawlError):
        start(g, 0, sample_edges="all")


def _queried(s, crawler):
    v = crawler.select()
    crawler.update(v, s.query(v))
    return v


def test_rc_single_node():
    s = start(path_graph(3), 1)
    assert RandomCrawler(s, 0).select() == 1


def test_rc_uniform():
    s = start(path_graph(3), 1)
    c = RandomCrawler(s, 42)
    _queried(s, c)
    counts = {0: 0, 2: 0}
    for _ in range(10000):
        counts[c.select()] += 1
    assert abs(counts[0] - 5000) <= 200 and abs(counts[2] - 5000) <= 200


def test_rc_full_run_on_clique():
    r = run_crawl(clique_graph(5), "RC", 3, rng_seed=1)
    assert r.trace[0] == 3 and sorted(r.trace.tolist()) == list(range(5))


def test_rw_steps_to_only_observed_neighbour():
    s = start(path_graph(3), 0)
    c = RandomWalkCrawler(s, 0)
    _queried(s, c)
    assert c.position == 0
    assert c.select() == 1


def test_rw_star_picks_uniform_leaf():
    hits = set()
    for seed in range(40):
        s = start(star_graph(5), 0)
        c = RandomWalkCrawler(s, seed)
        _queried(s, c)
        hits.add(c.select())
    assert hits == {1, 2, 3, 4}


def test_rw_escapes_closed_clique():
    g = barbell_graph(5, 5)
    for seed in range(100):
        r = run_crawl(g, "RW", seed % 10, rng_seed=seed)
        assert r.extra["walk_hops"] < 10**6
        assert sorted(r.trace.tolist()) == list(range(10))


def test_rw_hop_cap():
    # late in a clique crawl most neighbours of the walker are closed,
    # so a single hop cannot keep finding the frontier
    with pytest.raises(CrawlError, match="exceeded 1 hops"):
        run_crawl(clique_graph(12), "RW", 0, rng_seed=0, max_hops=1)


def test_bfs_and_dfs_orders():
    assert run_crawl(path_graph(4), "BFS", 0).trace.tolist() == [0, 1, 2, 3]
    assert run_crawl(star_graph(5), "BFS", 0).trace.tolist() == [0, 1, 2, 3, 4]
    # binary tree: 0 -> 1, 2; 1 -> 3, 4; 2 -> 5, 6
    tree = Graph.from_edges(7, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)])
    dfs = run_crawl(tree, "DFS", 0).trace.tolist()
    # newest (largest id) child first: branch through 2 is finished before 1
    assert dfs == [0, 2, 6, 5, 1, 4, 3]
    bfs = run_crawl(tree, "BFS", 0).trace.tolist()
    assert bfs == [0, 1, 2, 3, 4, 5, 6]


def test_mod_star_from_leaf():
    assert run_crawl(star_graph(5), "MOD", 1).trace.tolist() == [1, 0, 2, 3, 4]


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_mod_barbell_bridge_at_a_plus_one(barbell55, seed):
    trace = run_crawl(barbell55, "MOD", seed).trace.tolist()
    assert trace.index(5) + 1 == 6


def test_de_single_node_frontier():
    s = start(path_graph(3), 0)
    c = DECrawler(s, 0)
    assert c.select() == 0
    c.mode = DENSIFICATION
    assert c.select() == 0


def _phi_fixture(**params):
    # closed clique 0-3; observed 10 sees the whole clique (clust 1, deg 4),
    # observed 11 sees 4, 5, 6 which share no edge (clust 0, deg 3),
    # observed 7, 8, 9 hang off node 3 (deg 1), so the frontier mean degree is 2
    edges = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    edges += [(10, i) for i in range(4)] + [(0, 4), (1, 5), (2, 6)] + [(11, i) for i in (4, 5, 6)]
    edges += [(3, 7), (3, 8), (3, 9)]
    g = Graph.from_edges(12, edges)
    s = start(g, 0)
    c = DECrawler(s, 0, **params)
    for v in range(7):
        c.update(v, s.query(v))
    assert s.observed == {7, 8, 9, 10, 11}
    return s, c


def test_de_phi_prefers_low_clustering_hub():
    s, c = _phi_fixture(top_fraction=0.4)
    assert (s.sample_degree(10), s.sample_clustering(10)) == (4, 1.0)
    assert (s.sample_degree(11), s.sample_clustering(11)) == (3, 0.0)
    assert c.frontier.degree_sum / len(c.frontier) == 2.0
    assert c.phi(10) == 0.0
    assert c.phi(11) == 1.5
    c.mode = DENSIFICATION
    assert c.select() == 11


def test_de_densification_only_scores_top_block():
    s, c = _phi_fixture()
    c.mode = DENSIFICATION
    # the default top 20% of five frontier nodes is node 10 alone
    assert c.select() == 10


def test_de_expansion_draws_from_bottom_block():
    s, c = _phi_fixture()
    c.mode = EXPANSION
    picks = {c.select() for _ in range(200)}
    assert picks == {7, 8, 9, 11}


def test_de_mode_switching_is_recorded():
    g = random_connected_graph(150, 0.03, random.Random(1))
    r = run_crawl(g, "DE", 0, rng_seed=3)
    modes = r.extra["modes"]
    assert len(modes) == g.node_count
    assert modes[:10] == [EXPANSION] * 10
    assert DENSIFICATION in modes
    # switches only happen at burst boundaries
    for i in range(1, len(modes)):
        if modes[i] != modes[i - 1]:
            assert i % 10 == 0


def test_de_parameters_validated():
    s = start(path_graph(3), 0)
    for bad in ({"top_fraction": 1.0}, {"decay": 1.0}, {"min_burst": 0}):
        with pytest.raises(ValueError):
            DECrawler(s, 0, **bad)


def test_de_clustering_cache_stays_exact():
    g = random_connected_graph(80, 0.08, random.Random(5))
    s = start(g, 0)
    c = DECrawler(s, 7, min_burst=3)
    while s.observed:
        _queried(s, c)
        for v, cached in c._clust.items():
            assert cached == s.sample_clustering(v)


@pytest.mark.parametrize("cls", [RandomCrawler, RandomWalkCrawler, DFSCrawler, BFSCrawler, MODCrawler, DECrawler])
def test_empty_frontier(cls):
    s = start(Graph([[]]), 0)
    c = cls(s, 0)
    _queried(s, c)
    with pytest.raises(EmptyFrontierError):
        c.select()


def test_unknown_crawler():
    with pytest.raises(CrawlError):
        make_crawler("PR", start(path_graph(2), 0))


def test_run_crawl_rejects_disconnected():
    with pytest.raises(GraphError):
        run_crawl(Graph([[1], [0], []]), "BFS", 0)


@pytest.mark.parametrize("kind", list(CRAWLERS))
def test_run_crawl_basic_contracts(kind):
    assert len(run_crawl(clique_graph(4), kind, 0, rng_seed=1)) == 4
    g = random_connected_graph(60, 0.05, random.Random(9))
    a = run_crawl(g, kind, 5, rng_seed=11)
    b = run_crawl(g, kind, 5, rng_seed=11)
    assert np.array_equal(a.trace, b.trace)
    assert sorted(a.trace.tolist()) == list(range(60))
    assert len(run_crawl(g, kind, 5, rng_seed=11, budget=7)) == 7


def test_run_crawl_path_bfs_from_end():
    assert run_crawl(path_graph(5), "BFS", 0).trace.tolist() == [0, 1, 2, 3, 4]


def test_observers_see_every_query():
    seen = []
    run_crawl(path_graph(5), "MOD", 2, observers=[lambda state, v, new: seen.append((state.iteration, v))])
    assert [i for i, _ in seen] == [1, 2, 3, 4, 5]


def test_run_trace_labels():
    from netcrawl.graph import parse_edge_list

    g = parse_edge_list("x y\ny z\n")
    r = run_crawl(g, "BFS", 0)
    assert r.labels(g) == ["x", "y", "z"]
    assert r.closed_at.tolist() == [1, 2, 3]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(list(CRAWLERS)), st.sampled_from(["closed-incident", "induced"]))
def test_invariants_hold_every_step(seed, kind, mode):
    rnd = random.Random(seed)
    g = random_connected_graph(rnd.randint(1, 30), rnd.random() * 0.3, rnd)
    s = start(g, rnd.randrange(g.node_count), sample_edges=mode)
    crawler = make_crawler(kind, s, seed)
    while s.observed:
        v = crawler.select()
        assert v in s.observed
        if kind == "MOD":
            assert v == max(s.observed, key=lambda u: (s.sample_degree(u), -u))
        crawler.update(v, s.query(v))
        s.check_invariants()
    assert sorted(s.trace) == list(range(g.node_count))
