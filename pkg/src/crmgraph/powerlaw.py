"""Log-log slope estimation and power-law classification of sweep output.

Five relationships are fitted.  Across the growth sweep: edge total against
effective vertices (type I), vertices of one fixed degree against effective
vertices (type IIa), and vertices with one fixed triangle count against
effective vertices (type IIb).  Within a single snapshot: the survival
function of per-vertex degrees (type IIIa) and of per-vertex triangle counts
(type IIIb) against the threshold.  All fits are ordinary least squares on
base-10 logs, restricted to an x-quantile window.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .fileio import open_text_sink

__all__ = [
    "FitError",
    "LogLogFit",
    "CcdfCurve",
    "PowerLawReport",
    "fit_loglog",
    "ccdf",
    "classify",
    "write_fits_csv",
    "write_fits_json",
]

TYPE_LABELS = ("I", "IIa", "IIb", "IIIa", "IIIb")

_MIN_POINTS = 5
_SWEEP_MIN_SNAPSHOTS = 10

# Types I/II default to fitting the higher vertex counts.
DEFAULT_LOWER_Q = 0.5
DEFAULT_UPPER_Q = 1.0
# Type III: the fit targets the lower thresholds of the survival curve.
DEFAULT_TAIL_LOWER_Q = 0.0
DEFAULT_TAIL_UPPER_Q = 0.8


class FitError(ValueError):
    """Input unusable for a log-log fit or survival curve."""


@dataclass(frozen=True)
class LogLogFit:
    """OLS line through (log10 x, log10 y) on a quantile-restricted window."""

    slope: float
    intercept: float
    r_squared: float
    n_points: int
    lower_q: float
    upper_q: float


@dataclass(frozen=True)
class CcdfCurve:
    """Empirical survival curve P(X > M) at integer thresholds."""

    thresholds: np.ndarray
    survival: np.ndarray

    def __post_init__(self):
        thresholds = np.asarray(self.thresholds, dtype=np.int64)
        survival = np.asarray(self.survival, dtype=np.float64)
        object.__setattr__(self, "thresholds", thresholds)
        object.__setattr__(self, "survival", survival)
        if thresholds.shape != survival.shape:
            raise FitError("thresholds and survival must have equal length")
        if thresholds.size and np.any(np.diff(thresholds) <= 0):
            raise FitError("thresholds must be strictly ascending")
        if np.any(survival < 0.0) or np.any(survival > 1.0):
            raise FitError("survival values must lie in [0, 1]")
        if survival.size and np.any(np.diff(survival) > 0.0):
            raise FitError("survival must be nonincreasing")


@dataclass(frozen=True)
class PowerLawReport:
    """Per-type fits; a missing fit carries its reason in ``notes``."""

    fits: dict[str, LogLogFit | None]
    notes: dict[str, str]
    type_i_class: str | None = None  # "sparse" (slope < 2) or "dense"


def fit_loglog(xs, ys, lower_q: float = DEFAULT_LOWER_Q,
               upper_q: float = DEFAULT_UPPER_Q, *,
               min_points: int = _MIN_POINTS) -> LogLogFit:
    """Least-squares slope of log10(y) against log10(x).

    Parameters
    ----------
    xs, ys : array-like
        Strictly positive values of equal length.
    lower_q, upper_q : float
        The fit uses only points whose x lies within this quantile range of
        the x values.
    min_points : int
        Fewest points allowed in range; 5 by default, at least 2 always
        (tiny reference fixtures lower it explicitly).

    Raises
    ------
    FitError
        On nonpositive values, too few points in range, or constant x.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise FitError("xs and ys must be 1-d arrays of equal length")
    if not 0.0 <= lower_q < upper_q <= 1.0:
        raise FitError(f"invalid quantile range [{lower_q}, {upper_q}]")
    if min_points < 2:
        raise FitError(f"min_points must be at least 2, got {min_points}")
    if xs.size == 0 or np.any(xs <= 0.0) or np.any(ys <= 0.0):
        raise FitError("all values must be strictly positive")

    q_lo, q_hi = np.quantile(xs, [lower_q, upper_q])
    mask = (xs >= q_lo) & (xs <= q_hi)
    if int(mask.sum()) < min_points:
        raise FitError(f"only {int(mask.sum())} points in quantile range, need {min_points}")
    lx = np.log10(xs[mask])
    ly = np.log10(ys[mask])
    sxx = float(((lx - lx.mean()) ** 2).sum())
    if sxx == 0.0:
        raise FitError("x values are constant on the fit range")
    slope = float(((lx - lx.mean()) * (ly - ly.mean())).sum()) / sxx
    intercept = float(ly.mean() - slope * lx.mean())
    ss_res = float(((ly - (slope * lx + intercept)) ** 2).sum())
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return LogLogFit(slope, intercept, r_squared, int(mask.sum()), lower_q, upper_q)


def ccdf(samples) -> CcdfCurve:
    """Empirical survival curve of nonnegative integer samples.

    ``survival[M] = #(samples > M) / #samples`` for every integer threshold
    from 0 to max(samples) - 1.
    """
    samples = np.asarray(samples, dtype=np.int64)
    if samples.size == 0:
        raise FitError("ccdf needs at least one sample")
    if np.any(samples < 0):
        raise FitError("samples must be nonnegative integers")
    if samples.max() == 0:
        raise FitError("ccdf needs at least one positive sample")
    at_most = np.cumsum(np.bincount(samples))  # at_most[M] = #(samples <= M)
    thresholds = np.arange(samples.max())
    survival = 1.0 - at_most[thresholds] / samples.size
    return CcdfCurve(thresholds, survival)


def _hist_samples(hist: dict[int, int]) -> np.ndarray:
    values = np.array(sorted(hist), dtype=np.int64)
    counts = np.array([hist[v] for v in sorted(hist)], dtype=np.int64)
    return np.repeat(values, counts)


def _sweep_fit(rows, y_of, lower_q, upper_q):
    """Pooled fit of a per-snapshot quantity against effective vertices."""
    xs, ys, dropped = [], [], 0
    for _, _, snap in rows:
        x = snap.effective_vertices
        y = y_of(snap)
        if x > 0 and y > 0:
            xs.append(x)
            ys.append(y)
        else:
            dropped += 1
    return fit_loglog(np.array(xs, float), np.array(ys, float), lower_q, upper_q), dropped


def _tail_fit(hists, tail_lower_q, tail_upper_q):
    """Survival-curve fit pooled over the histograms of one snapshot N."""
    pooled: dict[int, int] = {}
    for hist in hists:
        for value, count in hist.items():
            pooled[value] = pooled.get(value, 0) + count
    curve = ccdf(_hist_samples(pooled))
    keep = (curve.thresholds >= 1) & (curve.survival > 0.0)
    dropped = int(curve.thresholds.size - keep.sum())
    fit = fit_loglog(curve.thresholds[keep].astype(float), curve.survival[keep],
                     tail_lower_q, tail_upper_q)
    return fit, dropped


def classify(sweep, *, degree_r: int = 1, triangle_r: int = 1,
             snapshot_n: int | None = None,
             lower_q: float = DEFAULT_LOWER_Q, upper_q: float = DEFAULT_UPPER_Q,
             tail_lower_q: float = DEFAULT_TAIL_LOWER_Q,
             tail_upper_q: float = DEFAULT_TAIL_UPPER_Q) -> PowerLawReport:
    """Fit all five power-law types over sweep rows.

    Parameters
    ----------
    sweep
        Either a sequence of (replica, n_rounds, GraphStats) rows or any
        object exposing such a sequence as ``.rows``.
    degree_r, triangle_r : int
        The fixed histogram bins tracked by types IIa and IIb.
    snapshot_n : int, optional
        Round count whose snapshots feed the type III survival fits; defaults
        to the largest round count present.
    lower_q, upper_q, tail_lower_q, tail_upper_q : float
        Quantile windows for the sweep fits and the survival fits.

    A type with insufficient data is reported as ``None`` with the reason in
    ``notes`` rather than failing the whole classification.
    """
    rows = list(getattr(sweep, "rows", sweep))
    fits: dict[str, LogLogFit | None] = {}
    notes: dict[str, str] = {}

    sweep_targets = {
        "I": lambda s: s.total_edges,
        "IIa": lambda s: s.degree_hist.get(degree_r, 0),
        "IIb": lambda s: s.triangle_hist.get(triangle_r, 0),
    }
    for label, y_of in sweep_targets.items():
        if len(rows) < _SWEEP_MIN_SNAPSHOTS:
            fits[label] = None
            notes[label] = f"{len(rows)} snapshots, need {_SWEEP_MIN_SNAPSHOTS}"
            continue
        try:
            fits[label], dropped = _sweep_fit(rows, y_of, lower_q, upper_q)
            if dropped:
                notes[label] = f"dropped {dropped} zero-valued snapshots"
        except FitError as exc:
            fits[label] = None
            notes[label] = str(exc)

    if rows:
        n_star = snapshot_n if snapshot_n is not None else max(n for _, n, _ in rows)
        chosen = [snap for _, n, snap in rows if n == n_star]
    else:
        n_star, chosen = None, []
    tail_targets = {
        "IIIa": lambda s: s.degree_hist,
        "IIIb": lambda s: s.triangle_hist,
    }
    for label, hist_of in tail_targets.items():
        if not chosen:
            fits[label] = None
            notes[label] = f"no snapshots at N={n_star}"
            continue
        try:
            fits[label], dropped = _tail_fit([hist_of(s) for s in chosen],
                                             tail_lower_q, tail_upper_q)
            if dropped:
                notes[label] = f"dropped {dropped} zero-survival or zero thresholds"
        except FitError as exc:
            fits[label] = None
            notes[label] = str(exc)

    type_i = fits.get("I")
    type_i_class = None if type_i is None else ("sparse" if type_i.slope < 2.0 else "dense")
    return PowerLawReport(fits, notes, type_i_class)


def _fit_rows(fits: dict[str, LogLogFit | None]):
    for label, fit in fits.items():
        if fit is not None:
            yield {"type": label, "slope": fit.slope, "intercept": fit.intercept,
                   "r2": fit.r_squared, "n_points": fit.n_points,
                   "lower_q": fit.lower_q, "upper_q": fit.upper_q}


def write_fits_csv(fits: dict[str, LogLogFit | None], path) -> None:
    """Fit table: ``type,slope,intercept,r2,n_points,lower_q,upper_q``."""
    with open_text_sink(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(["type", "slope", "intercept", "r2", "n_points", "lower_q", "upper_q"])
        for row in _fit_rows(fits):
            writer.writerow([row["type"], repr(row["slope"]), repr(row["intercept"]),
                             repr(row["r2"]), row["n_points"],
                             repr(row["lower_q"]), repr(row["upper_q"])])


def write_fits_json(fits: dict[str, LogLogFit | None], path) -> None:
    """JSON mirror of :func:`write_fits_csv` with identical values."""
    with open_text_sink(path) as fh:
        json.dump(list(_fit_rows(fits)), fh, indent=2)
        fh.write("\n")
