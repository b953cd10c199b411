"""Finite truncations of beta-process completely random measures.

A realization is an atomic measure: a list of weights in (0, 1) attached to
uniform random labels.  Weights come from the stick-breaking construction of
the three-parameter beta process: round ``i`` spawns ``Poisson(mass)`` atoms,
and each atom's weight is its round-``i`` stick times the product of the
complements of its earlier sticks, with stick ``l`` drawn from
``Beta(1 - discount, concentration + l * discount)``.  Setting the discount
to zero recovers the plain beta process.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .fileio import open_text_sink
from .rng import philox

__all__ = [
    "ParameterError",
    "BetaProcessParams",
    "StickBreakingConfig",
    "AtomicMeasure",
    "sample_three_param_bp",
    "rate_density",
    "sorted_view",
    "write_measure_csv",
    "read_measure_csv",
]

# Poisson rates above this are rejected outright: each round then spawns so
# many atoms that pair enumeration downstream stops being desk-scale.
MAX_MASS = 100.0

# Sticks are drawn in column blocks of this many rounds at a time so that a
# positive weight floor can stop drawing once no atom in the round can stay
# above it.
_STICK_CHUNK = 128


class ParameterError(ValueError):
    """A parameter or argument is outside its supported domain."""


@dataclass(frozen=True)
class BetaProcessParams:
    """Parameters of a (three-parameter) beta process.

    Attributes
    ----------
    concentration : float
        Must be positive.
    discount : float
        In [0, 1).  Zero gives the plain beta process.
    mass : float
        Total base-measure mass; also the Poisson rate of atoms per
        stick-breaking round.  Positive, at most ``MAX_MASS``.
    """

    concentration: float
    discount: float
    mass: float

    def __post_init__(self):
        if not math.isfinite(self.concentration) or self.concentration <= 0.0:
            raise ParameterError(f"concentration must be > 0, got {self.concentration}")
        if not 0.0 <= self.discount < 1.0:
            raise ParameterError(f"discount must be in [0, 1), got {self.discount}")
        if not math.isfinite(self.mass) or self.mass <= 0.0:
            raise ParameterError(f"mass must be > 0, got {self.mass}")
        if self.mass > MAX_MASS:
            raise ParameterError(f"mass {self.mass} exceeds supported maximum {MAX_MASS}")


@dataclass(frozen=True)
class StickBreakingConfig:
    """Truncation controls for the stick-breaking sampler.

    Attributes
    ----------
    rounds : int
        Number of outer rounds drawn; at least 1.
    weight_floor : float
        Atoms with weight below this are dropped.  In [0, 1).
    seed : int
        64-bit unsigned stream seed.
    """

    rounds: int
    weight_floor: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if int(self.rounds) != self.rounds or self.rounds < 1:
            raise ParameterError(f"rounds must be a positive integer, got {self.rounds}")
        if not 0.0 <= self.weight_floor < 1.0:
            raise ParameterError(f"weight_floor must be in [0, 1), got {self.weight_floor}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ParameterError(f"seed must fit in 64 unsigned bits, got {self.seed}")


@dataclass(frozen=True)
class AtomicMeasure:
    """A finite atomic measure: parallel arrays of weights and labels.

    Atoms are stored in generation order.  ``params`` and ``config`` record
    the provenance when the measure came from the sampler; measures built by
    hand or read from disk carry ``None`` there.
    """

    weights: np.ndarray
    labels: np.ndarray
    params: BetaProcessParams | None = None
    config: StickBreakingConfig | None = None

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64).copy()
        labels = np.asarray(self.labels, dtype=np.float64).copy()
        weights.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "labels", labels)
        if weights.shape != labels.shape or weights.ndim != 1:
            raise ParameterError("weights and labels must be 1-d arrays of equal length")
        if weights.size and not ((weights > 0.0) & (weights < 1.0)).all():
            raise ParameterError("every weight must lie strictly in (0, 1)")
        if np.unique(labels).size != labels.size:
            raise ParameterError("labels must be pairwise distinct")

    def __len__(self) -> int:
        return int(self.weights.size)

    def total_mass(self) -> float:
        return float(self.weights.sum())


def _round_atoms(params: BetaProcessParams, cfg: StickBreakingConfig,
                 round_index: int) -> tuple[np.ndarray, np.ndarray]:
    """Weights and labels of the atoms spawned in one round.

    Stream layout per round: one Poisson count, then the labels, then the
    stick matrix in fixed column blocks, so emitted values never depend on
    how many blocks were actually needed.
    """
    rng = philox(cfg.seed, round_index)
    count = int(rng.poisson(params.mass))
    if count == 0:
        return np.empty(0), np.empty(0)
    labels = rng.random(count)

    a = 1.0 - params.discount
    if cfg.weight_floor == 0.0:
        # nothing can be dropped early, so draw the whole stick matrix at once
        b = params.concentration + params.discount * np.arange(1, round_index + 1,
                                                               dtype=np.float64)
        sticks = rng.beta(a, b, size=(count, round_index))
        weight = (1.0 - sticks[:, :-1]).prod(axis=1) * sticks[:, -1]
        keep = (weight > 0.0) & (weight < 1.0)
        return weight[keep], labels[keep]

    prod = np.ones(count)  # running product of (1 - stick) over earlier rounds
    weight = None
    start = 1
    while start <= round_index:
        stop = min(start + _STICK_CHUNK, round_index + 1)
        b = params.concentration + params.discount * np.arange(start, stop, dtype=np.float64)
        sticks = rng.beta(a, b, size=(count, stop - start))
        if stop == round_index + 1:
            weight = prod * (1.0 - sticks[:, :-1]).prod(axis=1) * sticks[:, -1]
            break
        prod *= (1.0 - sticks).prod(axis=1)
        start = stop
        # prod only shrinks from here and the final stick is < 1, so once
        # every atom is under the floor the whole round is dropped
        if cfg.weight_floor > 0.0 and prod.max() < cfg.weight_floor:
            return np.empty(0), np.empty(0)

    keep = (weight > 0.0) & (weight < 1.0) & (weight >= cfg.weight_floor)
    return weight[keep], labels[keep]


def sample_three_param_bp(params: BetaProcessParams,
                          cfg: StickBreakingConfig) -> AtomicMeasure:
    """Draw a truncated three-parameter beta process by stick breaking.

    Parameters
    ----------
    params : BetaProcessParams
    cfg : StickBreakingConfig

    Returns
    -------
    AtomicMeasure
        Atoms of rounds ``1..cfg.rounds`` with weight at or above the floor,
        in generation order.  Bit-identical for identical inputs, and
        independent of any round-level parallelism because each round reads
        its own stream keyed by (seed, round).
    """
    all_w, all_l = [], []
    for i in range(1, cfg.rounds + 1):
        w, lab = _round_atoms(params, cfg, i)
        if w.size:
            all_w.append(w)
            all_l.append(lab)
    if all_w:
        weights = np.concatenate(all_w)
        labels = np.concatenate(all_l)
    else:
        weights = np.empty(0)
        labels = np.empty(0)
    return AtomicMeasure(weights, labels, params=params, config=cfg)


def rate_density(params: BetaProcessParams, w: float) -> float:
    """Density of the process rate measure at weight ``w``.

    The density, with respect to Lebesgue measure in ``w`` times the uniform
    base measure and scaled by the total mass, is::

        mass * Gamma(1 + c) / (Gamma(1 - d) * Gamma(c + d))
             * w^(-1 - d) * (1 - w)^(c + d - 1)

    with c the concentration and d the discount.  At d = 0 this reduces to
    the plain beta-process form ``mass * c * w^-1 * (1 - w)^(c - 1)``.
    Evaluated in log space so large concentrations do not overflow.
    """
    if not 0.0 < w < 1.0:
        raise ParameterError(f"w must lie in the open interval (0, 1), got {w}")
    c, d = params.concentration, params.discount
    log_norm = math.lgamma(1.0 + c) - math.lgamma(1.0 - d) - math.lgamma(c + d)
    log_dens = log_norm + (-1.0 - d) * math.log(w) + (c + d - 1.0) * math.log1p(-w)
    return params.mass * math.exp(log_dens)


def sorted_view(measure: AtomicMeasure) -> AtomicMeasure:
    """The same atoms reordered by nonincreasing weight (stable on ties)."""
    order = np.argsort(-measure.weights, kind="stable")
    return AtomicMeasure(measure.weights[order], measure.labels[order],
                         params=measure.params, config=measure.config)


def write_measure_csv(measure: AtomicMeasure, path: str | Path) -> None:
    """Write atoms as ``atom_id,weight,label`` with 17 significant digits."""
    with open_text_sink(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(["atom_id", "weight", "label"])
        for k in range(len(measure)):
            writer.writerow([k, f"{measure.weights[k]:.17g}", f"{measure.labels[k]:.17g}"])


def read_measure_csv(path: str | Path) -> AtomicMeasure:
    """Read a measure written by :func:`write_measure_csv` (no provenance)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["atom_id", "weight", "label"]:
            raise ParameterError(f"unexpected measure CSV header: {header}")
        weights, labels = [], []
        for row in reader:
            weights.append(float(row[1]))
            labels.append(float(row[2]))
    return AtomicMeasure(np.array(weights), np.array(labels))
