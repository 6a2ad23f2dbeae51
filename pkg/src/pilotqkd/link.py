"""Link budget, redundancy and throughput efficiency, plus the Monte-Carlo key pipeline.

Counts are per stationarity window: ``raw_qubits(f, T) = f * T`` and the
transmittable count is ``raw * delta``.  The total transmitted count ``N``
that normalizes redundancy is the transmittable count, i.e. data plus pilots.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from typing import Iterable, Sequence

import numpy as np

from . import bb84
from .channel import LinkParams, Orbit, damage, sample_channel, transmit_count
from .pilot import PilotString, correct_register, pilot_requirement, success_probability
from .seeding import child_rng, map_trials

MEO_RATES_HZ = (10e9, 5e9, 1e9, 500e6, 100e6)


class InfeasibleBudget(ValueError):
    def __init__(self, transmittable: int, pilots: int, data: int = 0):
        self.transmittable, self.pilots, self.data = transmittable, pilots, data
        super().__init__(
            f"infeasible budget: transmittable={transmittable} pilots={pilots} data={data}"
        )


def raw_qubits(f_hz: float, window_s: float) -> int:
    if not (f_hz > 0 and window_s > 0):
        raise ValueError("repetition rate and window must be positive")
    return round(f_hz * window_s)


def redundancy(r: int, n_total: int) -> float:
    """Pilot fraction ``r / N``."""
    if not 0 < r <= n_total:
        raise ValueError(f"redundancy needs 0 < r <= N (r={r}, N={n_total})")
    return r / n_total


@dataclass(frozen=True)
class BudgetRow:
    rep_rate_hz: float
    raw_qubits: int
    transmittable: int
    corrected_data: int
    redundancy: float

    @property
    def redundancy_percent(self) -> float:
        return 100.0 * self.redundancy


def budget_row(f_hz: float, window_s: float, delta: float, xi: int) -> BudgetRow:
    raw = raw_qubits(f_hz, window_s)
    tx = transmit_count(raw, delta)
    r = pilot_requirement(xi)
    if tx < r:
        raise InfeasibleBudget(tx, r)
    return BudgetRow(f_hz, raw, tx, tx - r, redundancy(r, tx))


def meo_table(window_s: float = 0.5, delta: float = 5e-5, xi: int = 5,
              rates: Sequence[float] = MEO_RATES_HZ) -> list[BudgetRow]:
    return [budget_row(f, window_s, delta, xi) for f in rates]


def throughput_efficiency(p: float, xi: int, n_total: int) -> float:
    """``1 - xi / ((1 - p) N)``; may be negative."""
    if not 0 <= p < 1:
        raise ValueError("rotation probability must lie in [0, 1)")
    if xi < 1 or n_total < 1:
        raise ValueError("xi and N must be >= 1")
    return 1.0 - (1.0 / (1.0 - p)) * xi / n_total


@dataclass(frozen=True)
class ThroughputPoint:
    p: float
    xi: int
    n_total: int
    eta: float


def efficiency_sweep(xi_list: Iterable[int], n_total: int, p_grid: Iterable[float]) -> list[ThroughputPoint]:
    p_grid = list(p_grid)
    return [
        ThroughputPoint(p, xi, n_total, throughput_efficiency(p, xi, n_total))
        for xi in xi_list
        for p in p_grid
    ]


def success_curve(xi_range: Iterable[int]) -> list[tuple[int, float]]:
    return [(xi, success_probability(xi)) for xi in xi_range]


def p_grid(p_min: float, p_max: float, steps: int) -> list[float]:
    if not 0 <= p_min < p_max < 1:
        raise ValueError("need 0 <= p_min < p_max < 1")
    if steps < 2:
        raise ValueError("need at least two grid points")
    return [float(p) for p in np.linspace(p_min, p_max, steps)]


# -- Monte-Carlo pipeline -----------------------------------------------------

@dataclass(frozen=True)
class TrialRecord:
    trial: int
    theta: float
    attempts: int
    success: bool
    sifted_len: int
    qber: float


@dataclass(frozen=True)
class ExperimentSummary:
    trials: int
    xi: int
    n_data: int
    transmittable: int
    success_rate: float
    expected_success: float
    qber_success: float
    qber_failure: float
    mean_yield: float
    records: tuple[TrialRecord, ...]

    def lines(self) -> list[str]:
        keys = ("trials", "xi", "n_data", "transmittable", "success_rate",
                "expected_success", "qber_success", "qber_failure", "mean_yield")
        return [f"{k}={getattr(self, k)!r}" for k in keys]


def check_budget(link: LinkParams, xi: int, n_data: int, mode: str = "expected",
                 rng: np.random.Generator | None = None) -> int:
    tx = transmit_count(raw_qubits(link.rep_rate_hz, link.window_s), link.attenuation, mode, rng)
    r = pilot_requirement(xi)
    if n_data < 1 or n_data + r > tx:
        raise InfeasibleBudget(tx, r, n_data)
    return tx


def run_trial(index: int, seed: int, orbit: Orbit, window_s: float, xi: int, n_data: int,
              theta: float | None = None) -> TrialRecord:
    """One stationarity window: encode, damage, pilot-correct, measure, sift."""
    rng = child_rng(seed, "trial", index)
    ch = sample_channel(orbit, rng, theta=theta, window_s=window_s)
    raw = bb84.generate_raw(n_data, rng)
    sent = [damage(s, ch, [0]) for s in bb84.encode(raw)]
    result = correct_register(sent, None, PilotString(ch.theta, xi), rng)
    bits, bases = bb84.measure_with_random_bases(result.output_state, rng)
    ka, kb = bb84.sift(raw, bases, bits)
    return TrialRecord(index, ch.theta, result.attempts_used, result.success, len(ka), bb84.qber(ka, kb))


def _mean(values) -> float:
    values = [v for v in values if not math.isnan(v)]
    return float(np.mean(values)) if values else float("nan")


def end_to_end_experiment(
    link: LinkParams,
    xi: int,
    n_data: int,
    trials: int,
    seed: int,
    *,
    theta: float | None = None,
    transmit_mode: str = "expected",
    threads: int = 1,
) -> ExperimentSummary:
    """Repeat the key pipeline over ``trials`` independent windows.

    Each trial draws from its own child stream of ``seed``, so the output is
    independent of ``threads``.  Failed registers yield no key.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    tx = check_budget(link, xi, n_data, transmit_mode, child_rng(seed, "link"))
    trial = partial(run_trial, seed=seed, orbit=link.orbit, window_s=link.window_s,
                    xi=xi, n_data=n_data, theta=theta)
    records = map_trials(trial, trials, threads)
    success = [r for r in records if r.success]
    failure = [r for r in records if not r.success]
    return ExperimentSummary(
        trials=trials,
        xi=xi,
        n_data=n_data,
        transmittable=tx,
        success_rate=len(success) / trials,
        expected_success=success_probability(xi),
        qber_success=_mean(r.qber for r in success),
        qber_failure=_mean(r.qber for r in failure),
        mean_yield=float(np.mean([r.sifted_len if r.success else 0 for r in records])),
        records=tuple(records),
    )

