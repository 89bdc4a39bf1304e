"""Coverage curves and their aggregates.

A curve holds one value per query, ``values[i - 1]`` being the coverage
after ``i`` queries. All curves are computed from a :class:`RunTrace` after
the fact, so crawls never pay for metric bookkeeping.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .centrality import TargetSet
from .crawl import RunTrace

__all__ = [
    "METRICS",
    "CoverageCurve",
    "node_coverage",
    "target_coverage",
    "average_curves",
    "auc",
    "gap_to_best",
    "winner_tally",
]

METRICS = ("node_coverage", "target_observed", "target_closed")


@dataclass(frozen=True)
class CoverageCurve:
    values: np.ndarray
    kind: str
    measure: str | None = None

    def __post_init__(self):
        if self.kind not in METRICS:
            raise ValueError(f"unknown metric {self.kind!r}")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def final(self) -> float:
        return float(self.values[-1])


def _count_by_iteration(at: np.ndarray, length: int) -> np.ndarray:
    """``out[i - 1]`` = number of entries of ``at`` in ``[0, i]``."""
    at = at[at >= 0]
    # anything seen at iteration 0 (the seed) counts from the first query on
    counts = np.bincount(np.maximum(at, 1), minlength=length + 1)[: length + 1]
    return np.cumsum(counts)[1:]


def node_coverage(run: RunTrace) -> CoverageCurve:
    """Fraction of nodes seen (closed or observed) after each query."""
    counts = _count_by_iteration(run.discovered_at, len(run.trace))
    return CoverageCurve(counts / run.node_count, "node_coverage")


def target_coverage(run: RunTrace, targets: TargetSet, variant: str = "closed") -> CoverageCurve:
    """Fraction of ``targets`` already seen (``"observed"``) or queried (``"closed"``)."""
    if targets.graph_size != run.node_count:
        raise ValueError(f"target set built on {targets.graph_size} nodes, run has {run.node_count}")
    if variant == "observed":
        at = run.discovered_at
    elif variant == "closed":
        at = run.closed_at
    else:
        raise ValueError(f"variant must be 'observed' or 'closed', got {variant!r}")
    members = np.fromiter(targets.members, dtype=np.int64, count=len(targets.members))
    counts = _count_by_iteration(at[members], len(run.trace))
    return CoverageCurve(counts / len(members), f"target_{variant}", targets.measure)


def average_curves(curves: Sequence[CoverageCurve]) -> CoverageCurve:
    """Pointwise mean of curves from different seeds."""
    if not curves:
        raise ValueError("no curves to average")
    n = len(curves[0])
    if any(len(c) != n for c in curves):
        raise ValueError("curves differ in length")
    head = curves[0]
    return CoverageCurve(np.mean([c.values for c in curves], axis=0), head.kind, head.measure)


def auc(curve: CoverageCurve | Sequence[float]) -> float:
    """Area under a coverage curve on the unit budget axis.

    Each query spans ``1 / |V|`` of the axis, so the area is the mean value.
    """
    values = curve.values if isinstance(curve, CoverageCurve) else np.asarray(curve, dtype=float)
    if len(values) == 0:
        raise ValueError("empty curve")
    return float(np.mean(values))


def gap_to_best(curves: Mapping[str, CoverageCurve]) -> dict[str, np.ndarray]:
    """Per-crawler difference to the pointwise best crawler (always <= 0)."""
    if len(curves) < 2:
        raise ValueError("gap to best needs at least two crawlers")
    lengths = {len(c) for c in curves.values()}
    if len(lengths) != 1:
        raise ValueError("curves differ in length")
    stacked = np.vstack([c.values for c in curves.values()])
    best = stacked.max(axis=0)
    return {name: c.values - best for name, c in curves.items()}


def winner_tally(table: Mapping[str, Mapping[str, Mapping[str, float]]],
                 measures: Sequence[str] | None = None) -> dict[str, dict[str, int]]:
    """Count per measure how often each crawler had the best AUC.

    ``table`` maps graph -> crawler -> measure -> AUC. All crawlers tied for
    the best value on a graph get a point.
    """
    if not table:
        raise ValueError("empty AUC table")
    crawlers = sorted({c for row in table.values() for c in row})
    if measures is None:
        measures = sorted({m for row in table.values() for cell in row.values() for m in cell})
    tally = {m: {c: 0 for c in crawlers} for m in measures}
    for graph, row in table.items():
        for m in measures:
            try:
                values = {c: row[c][m] for c in crawlers}
            except KeyError as exc:
                raise ValueError(f"missing AUC for graph {graph!r}, measure {m!r}: {exc}") from None
            best = max(values.values())
            for c, v in values.items():
                if v == best:
                    tally[m][c] += 1
    return tally
