"""Per-snapshot graph statistics on a binary graph.

Covers degrees, per-vertex triangle membership, the effective vertex count
(vertices with at least one edge), the edge total, and the exact-degree and
exact-triangle histograms.  Triangles are counted once per unordered triple;
a convention that double-counts ordered neighbor pairs would simply double
every value and shift nothing on a log-log plot.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass

from .fileio import open_text_sink
from .graphs import BinaryGraph

__all__ = [
    "GraphStats",
    "VertexProfile",
    "StatsConsistencyError",
    "degrees",
    "triangles",
    "summarize",
    "write_stats_wide_csv",
    "write_stats_long_csv",
]


class StatsConsistencyError(RuntimeError):
    """Internal cross-check failed; indicates an implementation bug."""


@dataclass(frozen=True)
class VertexProfile:
    """Degree and triangle count of one effective vertex."""

    vertex: int
    degree: int
    triangles: int

    def __post_init__(self):
        if self.triangles > self.degree * (self.degree - 1) // 2:
            raise StatsConsistencyError(
                f"vertex {self.vertex}: {self.triangles} triangles exceeds "
                f"C({self.degree}, 2)")


@dataclass(frozen=True)
class GraphStats:
    """Snapshot summary at a given round count.

    ``degree_hist[r]`` counts effective vertices of degree r (r >= 1);
    ``triangle_hist[r]`` counts effective vertices in exactly r triangles
    (r >= 0).  Both histograms sum to ``effective_vertices``, and the
    degree-weighted sum is twice ``total_edges``.
    """

    n_rounds: int
    effective_vertices: int
    total_edges: int
    degree_hist: dict[int, int]
    triangle_hist: dict[int, int]


def _neighbor_sets(graph: BinaryGraph) -> dict[int, set[int]]:
    nbrs: dict[int, set[int]] = {}
    for i, j in graph.adjacency:
        nbrs.setdefault(i, set()).add(j)
        nbrs.setdefault(j, set()).add(i)
    return nbrs


def degrees(graph: BinaryGraph) -> dict[int, int]:
    """Degree of every effective vertex (distinct-neighbor count)."""
    return {v: len(nb) for v, nb in _neighbor_sets(graph).items()}


def triangles(graph: BinaryGraph) -> dict[int, int]:
    """Number of unordered triangles each effective vertex belongs to.

    Iterates edges and intersects the endpoints' neighbor sets: each common
    neighbor of an edge closes one triangle, and every triangle is credited
    to each of its vertices exactly once, via its opposite edge.
    """
    nbrs = _neighbor_sets(graph)
    tri = {v: 0 for v in nbrs}
    for i, j in graph.adjacency:
        for k in nbrs[i] & nbrs[j]:
            tri[k] += 1
    return tri


def summarize(graph: BinaryGraph, n_rounds: int) -> GraphStats:
    """All snapshot statistics for a binary graph observed at ``n_rounds``.

    The edge total is computed both as the adjacency size and as half the
    degree sum; disagreement is an internal error, not bad input.
    """
    deg = degrees(graph)
    tri = triangles(graph)
    total_edges = len(graph.adjacency)
    degree_sum = sum(deg.values())
    if degree_sum != 2 * total_edges:
        raise StatsConsistencyError(
            f"degree sum {degree_sum} != twice edge count {total_edges}")
    if set(deg) != set(tri):
        raise StatsConsistencyError("degree and triangle maps cover different vertices")
    return GraphStats(
        n_rounds=n_rounds,
        effective_vertices=len(deg),
        total_edges=total_edges,
        degree_hist=dict(sorted(Counter(deg.values()).items())),
        triangle_hist=dict(sorted(Counter(tri.values()).items())),
    )


def write_stats_wide_csv(rows: list[GraphStats], path) -> None:
    """Wide per-snapshot table: ``N,V,E,D_1..D_max,T_0..T_max``.

    Histogram columns span every value up to the maximum seen in any row,
    with zeros where a row has no vertices at that value.
    """
    max_d = max((max(s.degree_hist, default=0) for s in rows), default=0)
    max_t = max((max(s.triangle_hist, default=0) for s in rows), default=0)
    d_cols = list(range(1, max_d + 1))
    t_cols = list(range(0, max_t + 1))
    with open_text_sink(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(["N", "V", "E"]
                        + [f"D_{r}" for r in d_cols] + [f"T_{r}" for r in t_cols])
        for s in rows:
            writer.writerow(
                [s.n_rounds, s.effective_vertices, s.total_edges]
                + [s.degree_hist.get(r, 0) for r in d_cols]
                + [s.triangle_hist.get(r, 0) for r in t_cols])


def write_stats_long_csv(rows: list[GraphStats], path) -> None:
    """Long histogram table: ``N,kind,r,count`` with kind degree|triangle."""
    with open_text_sink(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(["N", "kind", "r", "count"])
        for s in rows:
            for r, count in s.degree_hist.items():
                writer.writerow([s.n_rounds, "degree", r, count])
            for r, count in s.triangle_hist.items():
                writer.writerow([s.n_rounds, "triangle", r, count])
