"""Config-driven sweep experiments: measure, graph growth, stats, fits.

One run samples a measure per replica, grows (or independently regenerates)
the graph across a grid of round counts, summarizes every snapshot, fits the
power-law relationships over the pooled snapshots, and persists everything
as CSV plus a JSON fit mirror.  Every output byte is determined by the
configuration, including its master seed; replicas may run in parallel and
the worker count never affects results.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from .fileio import open_text_sink
from .graphs import binarize, extend, generate, start_growth
from .measures import (BetaProcessParams, ParameterError, StickBreakingConfig,
                       sample_three_param_bp)
from .powerlaw import LogLogFit, PowerLawReport, classify, write_fits_csv, write_fits_json
from .rng import derive_key
from .stats import GraphStats, summarize

__all__ = [
    "ExperimentConfig",
    "SweepResult",
    "ExperimentError",
    "run_sweep",
    "load_config",
    "save_config",
    "worker_count",
    "write_scatter_svg",
    "DESK_PROFILE",
    "PAPER_PROFILE",
]

THREADS_ENV = "CRMGG_THREADS"

_CONFIG_KEYS = ["gamma", "theta", "alpha", "rounds", "weight_floor",
                "n_start", "n_stop", "n_step", "replicas", "growth_mode",
                "seed", "out_dir", "fit_lower_q", "fit_upper_q"]

GROWTH_MODES = ("coupled", "independent")


class ExperimentError(RuntimeError):
    """A sweep could not complete; the message names the failed replicas."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Full specification of a sweep run (also the config.json schema)."""

    gamma: float = 3.0
    theta: float = 1.0
    alpha: float = 0.1
    rounds: int = 1000
    weight_floor: float = 1e-10
    n_start: int = 50
    n_stop: int = 2000
    n_step: int = 50
    replicas: int = 10
    growth_mode: str = "coupled"
    seed: int = 0
    out_dir: str = "sweep-out"
    fit_lower_q: float = 0.5
    fit_upper_q: float = 1.0

    def __post_init__(self):
        # parameter domains proper are enforced by BetaProcessParams and
        # StickBreakingConfig; here only the sweep-level shape is checked
        if self.n_start < 0 or self.n_stop < self.n_start or self.n_step < 1:
            raise ParameterError(
                f"bad grid: start {self.n_start}, stop {self.n_stop}, step {self.n_step}")
        if self.replicas < 1:
            raise ParameterError(f"replicas must be >= 1, got {self.replicas}")
        if self.growth_mode not in GROWTH_MODES:
            raise ParameterError(f"growth_mode must be one of {GROWTH_MODES}")
        self.params()  # validates gamma/theta/alpha
        self.sticks(0)  # validates rounds/weight_floor

    def params(self) -> BetaProcessParams:
        return BetaProcessParams(concentration=self.theta, discount=self.alpha,
                                 mass=self.gamma)

    def sticks(self, seed: int) -> StickBreakingConfig:
        return StickBreakingConfig(rounds=self.rounds, weight_floor=self.weight_floor,
                                   seed=seed)

    def n_grid(self) -> list[int]:
        return list(range(self.n_start, self.n_stop + 1, self.n_step))


# Desk-scale default profile: runs in minutes on a laptop.
DESK_PROFILE = ExperimentConfig()
# Full-scale truncation; measure sampling alone is substantially slower.
PAPER_PROFILE = replace(DESK_PROFILE, rounds=5000, n_step=10)


@dataclass(frozen=True)
class SweepResult:
    """Everything a sweep produced, before and after serialization."""

    config: ExperimentConfig
    rows: list[tuple[int, int, GraphStats]]  # (replica, n_rounds, stats)
    report: PowerLawReport
    replica_type_i: dict[int, LogLogFit | None]
    max_skip_bound: float
    elapsed_seconds: float


def worker_count(replicas: int) -> int:
    """Workers to use: the CRMGG_THREADS cap, else min(cpus, replicas)."""
    env = os.environ.get(THREADS_ENV)
    if env is not None:
        cap = int(env)
        if cap < 1:
            raise ParameterError(f"{THREADS_ENV} must be >= 1, got {env}")
        return min(cap, replicas)
    return min(os.cpu_count() or 1, replicas)


def _replica_rows(cfg: ExperimentConfig, replica: int):
    """All snapshots of one replica, plus its peak skip bound."""
    replica_seed = derive_key(cfg.seed, replica)
    measure = sample_three_param_bp(cfg.params(), cfg.sticks(replica_seed))
    rows = []
    skip_bound = 0.0
    if cfg.growth_mode == "coupled":
        state = start_growth(measure, derive_key(replica_seed, 1))
        prev = 0
        for n in cfg.n_grid():
            if n > prev:
                state = extend(state, n - prev)
                prev = n
            rows.append((replica, n, summarize(binarize(state.graph), n)))
            skip_bound = max(skip_bound, state.graph.skipped_edge_bound)
    else:
        for n in cfg.n_grid():
            graph = generate(measure, n, derive_key(replica_seed, 2, n))
            rows.append((replica, n, summarize(binarize(graph), n)))
            skip_bound = max(skip_bound, graph.skipped_edge_bound)
    return rows, skip_bound


def _gather_replicas(cfg: ExperimentConfig):
    """Run all replicas, containing per-replica failures until the end."""
    workers = worker_count(cfg.replicas)
    results: dict[int, tuple] = {}
    failures: list[tuple[int, BaseException]] = []
    if workers <= 1:
        for replica in range(cfg.replicas):
            try:
                results[replica] = _replica_rows(cfg, replica)
            except Exception as exc:  # noqa: BLE001 - reported with the index
                failures.append((replica, exc))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {replica: pool.submit(_replica_rows, cfg, replica)
                       for replica in range(cfg.replicas)}
            for replica in range(cfg.replicas):
                exc = futures[replica].exception()
                if exc is not None:
                    failures.append((replica, exc))
                else:
                    results[replica] = futures[replica].result()
    if failures:
        detail = "; ".join(f"replica {r}: {e}" for r, e in failures)
        raise ExperimentError(f"{len(failures)} replica(s) failed: {detail}")
    return results


def run_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Execute a sweep and write its outputs under ``cfg.out_dir``.

    Files written: ``config.json``, ``sweep.csv`` (replica,N,V,E,D1,T0,T1),
    ``hist.csv`` (replica,N,kind,r,count), ``fits.csv`` and ``fits.json``
    (pooled fits for every type plus per-replica type I fits).

    Raises
    ------
    ExperimentError
        If any replica fails; the message carries every failed index.
    OSError
        If the output directory cannot be created or written, before any
        sampling starts.
    """
    started = time.perf_counter()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory {out} is not writable")

    results = _gather_replicas(cfg)
    rows = [row for replica in range(cfg.replicas) for row in results[replica][0]]
    max_skip_bound = max(results[replica][1] for replica in range(cfg.replicas))

    report = classify(rows, lower_q=cfg.fit_lower_q, upper_q=cfg.fit_upper_q)
    replica_type_i: dict[int, LogLogFit | None] = {}
    for replica in range(cfg.replicas):
        sub = classify(results[replica][0],
                       lower_q=cfg.fit_lower_q, upper_q=cfg.fit_upper_q)
        replica_type_i[replica] = sub.fits["I"]

    save_config(cfg, out / "config.json")
    _write_sweep_csv(rows, out / "sweep.csv")
    _write_hist_csv(rows, out / "hist.csv")
    all_fits: dict[str, LogLogFit | None] = dict(report.fits)
    for replica, fit in replica_type_i.items():
        all_fits[f"I_replica{replica}"] = fit
    write_fits_csv(all_fits, out / "fits.csv")
    write_fits_json(all_fits, out / "fits.json")

    return SweepResult(cfg, rows, report, replica_type_i, max_skip_bound,
                       elapsed_seconds=time.perf_counter() - started)


def _write_sweep_csv(rows, path) -> None:
    with open_text_sink(path) as fh:
        fh.write("replica,N,V,E,D1,T0,T1\n")
        for replica, n, snap in rows:
            fh.write(f"{replica},{n},{snap.effective_vertices},{snap.total_edges},"
                     f"{snap.degree_hist.get(1, 0)},{snap.triangle_hist.get(0, 0)},"
                     f"{snap.triangle_hist.get(1, 0)}\n")


def _write_hist_csv(rows, path) -> None:
    with open_text_sink(path) as fh:
        fh.write("replica,N,kind,r,count\n")
        for replica, n, snap in rows:
            for r, count in snap.degree_hist.items():
                fh.write(f"{replica},{n},degree,{r},{count}\n")
            for r, count in snap.triangle_hist.items():
                fh.write(f"{replica},{n},triangle,{r},{count}\n")


def save_config(cfg: ExperimentConfig, path) -> None:
    """Write config.json with a fixed canonical field order."""
    data = asdict(cfg)
    ordered = {key: data[key] for key in _CONFIG_KEYS}
    with open_text_sink(path) as fh:
        json.dump(ordered, fh, indent=2)
        fh.write("\n")


def load_config(path) -> ExperimentConfig:
    """Read a config.json; unknown keys are rejected."""
    with open(path) as fh:
        data = json.load(fh)
    unknown = set(data) - set(_CONFIG_KEYS)
    if unknown:
        raise ParameterError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**data)


def write_scatter_svg(points, path, *, x_label: str, y_label: str,
                      width: int = 480, height: int = 360) -> None:
    """Minimal log-log scatter plot as a standalone SVG file.

    Data emission elsewhere is CSV; this exists only for a quick visual
    check without pulling in a plotting stack.
    """
    import math

    pts = [(x, y) for x, y in points if x > 0 and y > 0]
    if not pts:
        raise ParameterError("scatter needs at least one positive point")
    lx = [math.log10(x) for x, _ in pts]
    ly = [math.log10(y) for _, y in pts]
    x0, x1 = min(lx), max(lx)
    y0, y1 = min(ly), max(ly)
    xs = 1.0 if x1 == x0 else x1 - x0
    ys = 1.0 if y1 == y0 else y1 - y0
    pad, radius = 40, 2.5

    def to_px(u, v):
        px = pad + (u - x0) / xs * (width - 2 * pad)
        py = height - pad - (v - y0) / ys * (height - 2 * pad)
        return px, py

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect width="{width}" height="{height}" fill="white"/>',
             f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" '
             f'y2="{height - pad}" stroke="black"/>',
             f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
             f'<text x="{width // 2}" y="{height - 8}" font-size="12" '
             f'text-anchor="middle">log10 {x_label}</text>',
             f'<text x="12" y="{height // 2}" font-size="12" text-anchor="middle" '
             f'transform="rotate(-90 12 {height // 2})">log10 {y_label}</text>']
    for u, v in zip(lx, ly):
        px, py = to_px(u, v)
        parts.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="{radius}" '
                     f'fill="steelblue" fill-opacity="0.6"/>')
    parts.append("</svg>")
    with open_text_sink(path) as fh:
        fh.write("\n".join(parts) + "\n")
