"""Simulation harness for online network crawlers.

Crawls static undirected graphs with six frontier strategies (RC, RW, DFS,
BFS, MOD, DE) and measures how fast each collects the top-p nodes under
degree, k-coreness, betweenness and eccentricity.
"""
from .centrality import (
    MEASURES,
    ScoreTable,
    TargetSet,
    betweenness_approx,
    betweenness_scores,
    build_target_set,
    compute_scores,
    coreness_scores,
    degree_scores,
    eccentricity_scores,
)
from .crawl import CRAWLERS, CrawlError, CrawlState, RunTrace, make_crawler, run_crawl, start
from .graph import (
    Graph,
    GraphError,
    ParseError,
    generate,
    giant_component,
    local_clustering,
    parse_edge_list,
    read_edge_list,
    relabel,
    serialize_edge_list,
)
from .metrics import CoverageCurve, auc, average_curves, gap_to_best, node_coverage, target_coverage, winner_tally

__version__ = "0.1.0"

__all__ = [
    "MEASURES", "ScoreTable", "TargetSet", "betweenness_approx", "betweenness_scores", "build_target_set",
    "compute_scores", "coreness_scores", "degree_scores", "eccentricity_scores",
    "CRAWLERS", "CrawlError", "CrawlState", "RunTrace", "make_crawler", "run_crawl", "start",
    "Graph", "GraphError", "ParseError", "generate", "giant_component", "local_clustering",
    "parse_edge_list", "read_edge_list", "relabel", "serialize_edge_list",
    "CoverageCurve", "auc", "average_curves", "gap_to_best", "node_coverage", "target_coverage",
    "winner_tally",
]
