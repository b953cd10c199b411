"""Multigraph and binary-graph generation from an atomic measure.

Each of ``n_rounds`` rounds independently connects every unordered atom pair
(i, j) with probability ``w_i * w_j`` and no loops.  Because the per-round
indicators are iid across rounds and independent across pairs, the full
round-by-round draw collapses to one ``Binomial(n_rounds, w_i w_j)`` count
per pair with exactly the same joint law; that collapse is the default path,
and the literal round-by-round sampler is kept as a small-scale oracle.

Per-pair randomness is keyed by (seed, i, j, epoch), so any partitioning of
the pair enumeration across workers merges to the same result, and growing a
graph in increments (one epoch per increment) is reproducible from scratch.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .fileio import open_text_sink
from .measures import AtomicMeasure, ParameterError
from .rng import derive_key, keyed_uniforms, philox

__all__ = [
    "MultiGraph",
    "BinaryGraph",
    "GrowthState",
    "generate",
    "generate_exact_rounds",
    "start_growth",
    "extend",
    "binarize",
    "write_multigraph_csv",
    "read_multigraph_csv",
    "write_binarygraph_csv",
    "read_binarygraph_csv",
]

# Pairs whose expected count n * w_i * w_j falls below this are not drawn at
# all; the union bound on edges lost this way is tracked per graph.
DEFAULT_PAIR_SKIP = 1e-12

# generate_exact_rounds exists to cross-check distributions, not to scale.
_EXACT_MAX_ATOMS = 200
_EXACT_MAX_ROUNDS = 1000

# Below exp(-600) the k = 0 binomial pmf underflows; those few near-certain
# pairs fall back to a per-pair Philox stream instead of the inversion scan.
_LOG_PMF0_MIN = -600.0


@dataclass(frozen=True)
class MultiGraph:
    """Accumulated edge counts over ``n_rounds`` Bernoulli rounds.

    ``edge_counts`` maps each connected unordered pair (i, j), i < j, to its
    positive count; absent pairs have count zero.  ``skipped_pairs`` and
    ``skipped_edge_bound`` report the pruning done while sampling: the bound
    is the sum of n * w_i * w_j over all pair draws that were skipped, an
    upper bound on the expected number of missed edges.
    """

    n_rounds: int
    atom_count: int
    edge_counts: dict[tuple[int, int], int]
    skipped_pairs: int = 0
    skipped_edge_bound: float = 0.0

    def __post_init__(self):
        if self.n_rounds < 0:
            raise ParameterError(f"n_rounds must be >= 0, got {self.n_rounds}")
        for (i, j), count in self.edge_counts.items():
            if i == j:
                raise ParameterError(f"loop ({i}, {i}) is not allowed")
            if not 0 <= i < j < self.atom_count:
                raise ParameterError(f"pair ({i}, {j}) out of range for {self.atom_count} atoms")
            if not 1 <= count <= self.n_rounds:
                raise ParameterError(f"count {count} for pair ({i}, {j}) outside 1..{self.n_rounds}")

    def total_edges(self) -> int:
        """Number of distinct connected pairs."""
        return len(self.edge_counts)


@dataclass(frozen=True)
class BinaryGraph:
    """Unordered adjacency: the pairs with at least one edge."""

    adjacency: frozenset[tuple[int, int]]
    atom_count: int

    def __post_init__(self):
        object.__setattr__(self, "adjacency", frozenset(self.adjacency))
        for i, j in self.adjacency:
            if i == j:
                raise ParameterError(f"loop ({i}, {i}) is not allowed")
            if not 0 <= i < j < self.atom_count:
                raise ParameterError(f"pair ({i}, {j}) out of range for {self.atom_count} atoms")


@dataclass(frozen=True)
class GrowthState:
    """A graph being grown round-by-round from a fixed measure.

    Replaying the same (measure, seed) trajectory reproduces the same graph
    at every intermediate round count; each ``extend`` call consumes the next
    epoch of the per-pair streams.
    """

    measure: AtomicMeasure
    seed: int
    graph: MultiGraph
    epoch: int = 0
    pair_skip: float = DEFAULT_PAIR_SKIP
    exact_pairs: bool = False

    @property
    def n_rounds(self) -> int:
        return self.graph.n_rounds


def _select_pairs(weights: np.ndarray, n_rounds: int, pair_skip: float,
                  exact_pairs: bool):
    """Enumerate pairs worth drawing, in descending-weight order.

    Returns original-index arrays (i, j) with i < j, their probabilities,
    and the (skipped pair count, skipped expected-edge mass) accounting.
    """
    k = weights.size
    order = np.argsort(-weights, kind="stable")
    ws = weights[order]
    total_pairs = k * (k - 1) // 2

    if exact_pairs or pair_skip <= 0.0:
        cut = np.full(k, k, dtype=np.int64)
    else:
        # first sorted position whose weight drops under pair_skip/(n * w_a);
        # everything beyond it pairs with a below the draw threshold
        thresholds = pair_skip / (n_rounds * ws)
        cut = np.searchsorted(-ws, -thresholds, side="right")

    lens = np.clip(cut - np.arange(k) - 1, 0, None)
    total_kept = int(lens.sum())

    skipped_bound = 0.0
    skipped = total_pairs - total_kept
    if skipped:
        suffix = np.concatenate([np.cumsum(ws[::-1])[::-1], [0.0]])
        first_skipped = np.maximum(cut, np.arange(k) + 1)
        skipped_bound = float(n_rounds * (ws * suffix[first_skipped]).sum())

    a = np.repeat(np.arange(k), lens)
    offsets = np.cumsum(lens) - lens
    b = np.arange(total_kept) - offsets[a] + a + 1
    oi, oj = order[a], order[b]
    probs = ws[a] * ws[b]
    lo = np.minimum(oi, oj)
    hi = np.maximum(oi, oj)
    return lo, hi, probs, skipped, skipped_bound


def _binomial_counts(base_key: int, i: np.ndarray, j: np.ndarray,
                     n_rounds: int, probs: np.ndarray) -> np.ndarray:
    """Exact Binomial(n_rounds, p) count per pair from its keyed stream.

    Counts come from inverse-CDF inversion of one keyed uniform per pair; a
    pair whose zero-count probability underflows instead draws from its own
    keyed Philox stream.  Either way the value depends only on
    (base_key, i, j, n_rounds, p).
    """
    counts = np.zeros(probs.size, dtype=np.int64)
    if probs.size == 0 or n_rounds == 0:
        return counts

    log_q0 = n_rounds * np.log1p(-probs)
    big = log_q0 < _LOG_PMF0_MIN
    u = keyed_uniforms(base_key, i, j)

    alive = np.flatnonzero((u >= np.exp(log_q0)) & ~big)
    if alive.size:
        p = probs[alive]
        ratio = p / (1.0 - p)
        pmf = np.exp(log_q0[alive])
        cdf = pmf.copy()
        k = np.zeros(alive.size)
        ua = u[alive]
        while alive.size:
            pmf *= (n_rounds - k) / (k + 1.0) * ratio
            k += 1.0
            cdf += pmf
            done = (ua < cdf) | (k >= n_rounds)
            counts[alive[done]] = k[done].astype(np.int64)
            keep = ~done
            alive, pmf, cdf, k, ua, ratio = (
                alive[keep], pmf[keep], cdf[keep], k[keep], ua[keep], ratio[keep])

    for idx in np.flatnonzero(big):
        rng = philox(base_key, int(i[idx]), int(j[idx]))
        counts[idx] = rng.binomial(n_rounds, probs[idx])
    return counts


def _draw_increment(measure: AtomicMeasure, delta_rounds: int, seed: int,
                    epoch: int, pair_skip: float, exact_pairs: bool):
    """One epoch of pair draws: {pair: positive count}, skip accounting."""
    weights = measure.weights
    if delta_rounds == 0 or weights.size < 2:
        return {}, 0, 0.0
    i, j, probs, skipped, bound = _select_pairs(weights, delta_rounds, pair_skip, exact_pairs)
    counts = _binomial_counts(derive_key(seed, epoch), i, j, delta_rounds, probs)
    nz = np.flatnonzero(counts)
    edges = {(int(i[t]), int(j[t])): int(counts[t]) for t in nz}
    return edges, skipped, bound


def generate(measure: AtomicMeasure, n_rounds: int, seed: int, *,
             pair_skip: float = DEFAULT_PAIR_SKIP,
             exact_pairs: bool = False) -> MultiGraph:
    """Sample the multigraph after ``n_rounds`` rounds of edge draws.

    Parameters
    ----------
    measure : AtomicMeasure
        Atom weights; graph vertices are the atom indices.
    n_rounds : int
        Number of Bernoulli rounds collapsed into one binomial per pair.
    seed : int
        Stream seed; fixed (measure, n_rounds, seed) gives a fixed graph.
    pair_skip : float
        Pairs with ``n_rounds * w_i * w_j`` below this are never drawn; the
        resulting expected-missed-edge bound is recorded on the graph.
    exact_pairs : bool
        Disable skipping and draw every pair.
    """
    if int(n_rounds) != n_rounds or n_rounds < 0:
        raise ParameterError(f"n_rounds must be a nonnegative integer, got {n_rounds}")
    edges, skipped, bound = _draw_increment(
        measure, int(n_rounds), seed, 0, pair_skip, exact_pairs)
    return MultiGraph(int(n_rounds), len(measure), edges,
                      skipped_pairs=skipped, skipped_edge_bound=bound)


def generate_exact_rounds(measure: AtomicMeasure, n_rounds: int, seed: int) -> MultiGraph:
    """Literal round-by-round Bernoulli reference sampler.

    Same distribution as :func:`generate` with no pair skipping, in
    O(n_rounds * atoms^2) time.  Refuses inputs beyond the small scales it
    exists for; it is the honesty oracle for the binomial collapse, not a
    production path.
    """
    if int(n_rounds) != n_rounds or n_rounds < 0:
        raise ParameterError(f"n_rounds must be a nonnegative integer, got {n_rounds}")
    k = len(measure)
    if k > _EXACT_MAX_ATOMS:
        raise ParameterError(f"exact-rounds sampler limited to {_EXACT_MAX_ATOMS} atoms, got {k}")
    if n_rounds > _EXACT_MAX_ROUNDS:
        raise ParameterError(f"exact-rounds sampler limited to {_EXACT_MAX_ROUNDS} rounds, got {n_rounds}")

    iu, ju = np.triu_indices(k, k=1)
    probs = measure.weights[iu] * measure.weights[ju]
    counts = np.zeros(probs.size, dtype=np.int64)
    rng = philox(seed, 0x0EAC7)
    for _ in range(int(n_rounds)):
        counts += rng.random(probs.size) < probs
    nz = np.flatnonzero(counts)
    edges = {(int(iu[t]), int(ju[t])): int(counts[t]) for t in nz}
    return MultiGraph(int(n_rounds), k, edges)


def start_growth(measure: AtomicMeasure, seed: int, *,
                 pair_skip: float = DEFAULT_PAIR_SKIP,
                 exact_pairs: bool = False) -> GrowthState:
    """A fresh trajectory at zero rounds for the given measure and seed."""
    empty = MultiGraph(0, len(measure), {})
    return GrowthState(measure, seed, empty, epoch=0,
                       pair_skip=pair_skip, exact_pairs=exact_pairs)


def extend(state: GrowthState, delta_rounds: int) -> GrowthState:
    """Advance a trajectory by ``delta_rounds`` additional rounds.

    The increment is one Binomial(delta_rounds, w_i w_j) draw per pair from
    the next epoch's streams, added onto the existing counts, so the result
    has the same marginal law as a one-shot generate at the combined round
    count and every pair count is nondecreasing along the trajectory.
    """
    if int(delta_rounds) != delta_rounds or delta_rounds < 1:
        raise ParameterError(f"delta_rounds must be a positive integer, got {delta_rounds}")
    epoch = state.epoch + 1
    new_edges, skipped, bound = _draw_increment(
        state.measure, int(delta_rounds), state.seed, epoch,
        state.pair_skip, state.exact_pairs)
    merged = dict(state.graph.edge_counts)
    for pair, count in new_edges.items():
        merged[pair] = merged.get(pair, 0) + count
    graph = MultiGraph(
        state.graph.n_rounds + int(delta_rounds), state.graph.atom_count, merged,
        skipped_pairs=state.graph.skipped_pairs + skipped,
        skipped_edge_bound=state.graph.skipped_edge_bound + bound)
    return replace(state, graph=graph, epoch=epoch)


def binarize(graph: MultiGraph) -> BinaryGraph:
    """Threshold counts at one: the pairs connected at least once."""
    return BinaryGraph(frozenset(graph.edge_counts), graph.atom_count)


def write_multigraph_csv(graph: MultiGraph, path) -> None:
    """Write ``i,j,count`` rows sorted by pair."""
    with open_text_sink(path) as fh:
        fh.write("i,j,count\n")
        for (i, j) in sorted(graph.edge_counts):
            fh.write(f"{i},{j},{graph.edge_counts[(i, j)]}\n")


def read_multigraph_csv(path, n_rounds: int | None = None,
                        atom_count: int | None = None) -> MultiGraph:
    """Read an ``i,j,count`` file.

    When ``n_rounds`` is unknown the largest count observed is used, the
    smallest round total consistent with the data.
    """
    edges = {}
    with open(path, newline="") as fh:
        header = fh.readline().strip()
        if header != "i,j,count":
            raise ParameterError(f"unexpected multigraph CSV header: {header!r}")
        for line in fh:
            i_s, j_s, c_s = line.strip().split(",")
            edges[(int(i_s), int(j_s))] = int(c_s)
    if atom_count is None:
        atom_count = 1 + max((j for _, j in edges), default=-1)
    if n_rounds is None:
        n_rounds = max(edges.values(), default=0)
    return MultiGraph(n_rounds, atom_count, edges)


def write_binarygraph_csv(graph: BinaryGraph, path) -> None:
    """Write ``i,j`` rows sorted by pair."""
    with open_text_sink(path) as fh:
        fh.write("i,j\n")
        for (i, j) in sorted(graph.adjacency):
            fh.write(f"{i},{j}\n")


def read_binarygraph_csv(path, atom_count: int | None = None) -> BinaryGraph:
    """Read an ``i,j`` file written by :func:`write_binarygraph_csv`."""
    pairs = set()
    with open(path, newline="") as fh:
        header = fh.readline().strip()
        if header != "i,j":
            raise ParameterError(f"unexpected binary-graph CSV header: {header!r}")
        for line in fh:
            i_s, j_s = line.strip().split(",")
            pairs.add((int(i_s), int(j_s)))
    if atom_count is None:
        atom_count = 1 + max((j for _, j in pairs), default=-1)
    return BinaryGraph(frozenset(pairs), atom_count)
