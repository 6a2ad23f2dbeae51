"""CSV emitters for tables, curves and experiment transcripts.

Reals are written with 17 significant digits so a parsed file reproduces
the in-memory floats exactly.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Iterable, Sequence

from .cascade import CascadeParams, CascadeStats, cascade_statistics, qber_from_rotation_probability
from .link import BudgetRow, ExperimentSummary, ThroughputPoint, efficiency_sweep
from .pilot import PilotBudget
from .seeding import child_rng, map_trials

log = logging.getLogger(__name__)

TABLE1_HEADER = ["xi", "r", "p_success"]
TABLE2_HEADER = ["f_hz", "raw", "transmittable", "corrected", "redundancy_percent"]
FIG4_HEADER = ["xi", "p_success"]
FIG5_HEADER = ["p", "xi", "N", "eta", "source"]
EXPERIMENT_HEADER = ["trial", "theta", "attempts", "success", "sifted_len", "qber"]


def fmt(x: float) -> str:
    return f"{x:.17g}"


def _write(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def read_csv(path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def write_table1(path, rows: Iterable[PilotBudget]) -> Path:
    return _write(path, TABLE1_HEADER, ([b.xi, b.r, fmt(b.p_success)] for b in rows))


def write_table2(path, rows: Iterable[BudgetRow]) -> Path:
    return _write(path, TABLE2_HEADER, (
        [fmt(r.rep_rate_hz), r.raw_qubits, r.transmittable, r.corrected_data, fmt(r.redundancy_percent)]
        for r in rows
    ))


def write_fig4(path, curve: Iterable[tuple[int, float]]) -> Path:
    return _write(path, FIG4_HEADER, ([xi, fmt(p)] for xi, p in curve))


@dataclass(frozen=True)
class CascadePoint:
    p: float
    n_total: int
    eta: float
    stats: CascadeStats | None


def _cascade_point(index: int, grid: Sequence[float], n_total: int, trials: int,
                   params: CascadeParams, seed: int) -> CascadePoint:
    p = grid[index]
    rng = child_rng(seed, "cascade", index)
    try:
        stats = cascade_statistics(n_total, qber_from_rotation_probability(p), params, trials, rng)
    except ValueError:
        return CascadePoint(p, n_total, math.nan, None)
    return CascadePoint(p, n_total, stats.efficiency, stats)


def cascade_sweep(p_grid: Sequence[float], n_total: int, trials: int, seed: int,
                  params: CascadeParams = CascadeParams(), threads: int = 1) -> list[CascadePoint]:
    """Cascade efficiency on the rotation-probability axis (qber = p/2).

    ``p = 0`` has no Cascade block size and is skipped; a point where no trial
    reconciles gets ``eta = nan``.
    """
    grid = [p for p in p_grid if p > 0]
    fn = partial(_cascade_point, grid=grid, n_total=n_total, trials=trials, params=params, seed=seed)
    points = map_trials(fn, len(grid), threads)
    for pt in points:
        if pt.stats is None:
            log.warning("no Cascade run reconciled at p=%s", pt.p)
    return points


def write_fig5(path, pilot: Iterable[ThroughputPoint], cascade: Iterable[CascadePoint] = ()) -> Path:
    rows = [[fmt(t.p), t.xi, t.n_total, fmt(t.eta), "pilot"] for t in pilot]
    rows += [[fmt(c.p), "", c.n_total, fmt(c.eta), "cascade"] for c in cascade]
    return _write(path, FIG5_HEADER, rows)


def write_experiment(path, summary: ExperimentSummary) -> Path:
    return _write(path, EXPERIMENT_HEADER, (
        [r.trial, fmt(r.theta), r.attempts, int(r.success), r.sifted_len, fmt(r.qber)]
        for r in summary.records
    ))


def sweep_rows(xi_list, n_total, grid, cascade_trials, seed, threads=1):
    pilot = efficiency_sweep(xi_list, n_total, grid)
    cascade = cascade_sweep(grid, n_total, cascade_trials, seed, threads=threads) if cascade_trials else []
    return pilot, cascade


def plot_fig5(csv_path, out_path) -> Path:
    """Render fig5.csv as a vector graphic; efficiencies below 0 are clamped and flagged."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = read_csv(csv_path)
    series: dict[str, list[tuple[float, float]]] = {}
    clamped = False
    for row in rows:
        label = f"pilot, xi={row['xi']}" if row["source"] == "pilot" else "cascade (qber = p/2)"
        eta = float(row["eta"])
        clamped |= eta < 0
        series.setdefault(label, []).append((float(row["p"]), max(eta, 0.0)))
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, pts in series.items():
        xs, ys = zip(*sorted(pts))
        ax.plot(xs, ys, label=label)
    ax.set_xlabel("channel rotation probability p")
    ax.set_ylabel("throughput efficiency" + (" (clamped at 0)" if clamped else ""))
    ax.set_ylim(0, 1.02)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return Path(out_path)
