import math
from fractions import Fraction

import pytest

from pilotqkd import link
from pilotqkd.channel import LinkParams


@pytest.mark.parametrize("f, T, expected", [(100e6, 0.5, 50_000_000), (10e9, 0.5, 5_000_000_000)])
def test_raw_qubits(f, T, expected):
    assert link.raw_qubits(f, T) == expected


def test_raw_qubits_guard():
    with pytest.raises(ValueError):
        link.raw_qubits(100e6, 0)


@pytest.mark.parametrize("f, corrected, d_percent", [
    (10e9, 249_946, 0.0216),
    (1e9, 24_946, 0.216),   # 25000 - 54, not the 29946 of the reference table
    (100e6, 2_446, 2.16),
])
def test_budget_row(f, corrected, d_percent):
    row = link.budget_row(f, 0.5, 5e-5, 5)
    assert row.corrected_data == corrected
    assert row.transmittable == corrected + 54
    assert row.redundancy_percent == pytest.approx(d_percent, abs=1e-12)


def test_budget_row_infeasible():
    with pytest.raises(link.InfeasibleBudget) as exc:
        link.budget_row(100e6, 0.5, 5e-5, 10)
    assert (exc.value.transmittable, exc.value.pilots) == (2500, 4107)


@pytest.mark.parametrize("r, n, expected", [(54, 250_000, 0.000216), (54, 12_500, 0.00432), (7, 7, 1.0)])
def test_redundancy(r, n, expected):
    assert link.redundancy(r, n) == pytest.approx(expected, rel=1e-15)


def test_redundancy_guard():
    with pytest.raises(ValueError):
        link.redundancy(10, 5)


@pytest.mark.parametrize("p, xi, n, expected", [(0, 10, 2500, 0.996), (0.5, 10, 2500, 0.992), (0, 9, 9, 0.0)])
def test_throughput_efficiency(p, xi, n, expected):
    assert link.throughput_efficiency(p, xi, n) == pytest.approx(expected, abs=1e-15)


def test_throughput_efficiency_guard_and_negative():
    with pytest.raises(ValueError):
        link.throughput_efficiency(1.0, 10, 2500)
    assert link.throughput_efficiency(0.99, 30, 2500) < 0


def test_efficiency_rational_identities():
    for p in (Fraction(0), Fraction(1, 3), Fraction(9, 10)):
        for xi in (1, 10, 30):
            for n in (100, 2500):
                loss = (1 / (1 - p)) * xi / n
                loss2 = (1 / (1 - p)) * xi / (2 * n)
                assert loss2 == loss / 2
                assert link.throughput_efficiency(float(p), xi, n) == pytest.approx(float(1 - loss), abs=1e-14)


def test_efficiency_sweep_ordering():
    grid = link.p_grid(0, 0.99, 50)
    pts = link.efficiency_sweep([10, 20, 30], 2500, grid)
    eta = {(t.xi, t.p): t.eta for t in pts}
    for p in grid:
        assert eta[10, p] >= eta[20, p] >= eta[30, p]
    for xi in (10, 20, 30):
        assert eta[xi, 0.0] == pytest.approx(1 - xi / 2500, abs=1e-15)
        col = [eta[xi, p] for p in grid]
        assert all(b < a for a, b in zip(col, col[1:]))
    assert link.efficiency_sweep([10], 2500, []) == []


def test_p_grid_guards():
    with pytest.raises(ValueError):
        link.p_grid(0.3, 0.3, 5)
    with pytest.raises(ValueError):
        link.p_grid(0.0, 1.0, 5)


def test_success_curve():
    curve = link.success_curve(range(1, 8))
    assert curve[1:4] == [(2, 0.75), (3, 0.875), (4, 0.9375)]
    assert all(b[1] > a[1] for a, b in zip(curve, curve[1:]))


def test_experiment_identity_channel():
    s = link.end_to_end_experiment(LinkParams(), 3, 12, 200, seed=1, theta=0.0)
    assert all(r.attempts >= 1 for r in s.records)
    assert s.qber_success == 0
    for r in s.records:
        assert r.qber == 0 or math.isnan(r.qber)
    ok = [r for r in s.records if r.success]
    expected_yield = sum(r.sifted_len for r in ok) / len(s.records)
    assert s.mean_yield == pytest.approx(expected_yield)


def test_experiment_success_rate_and_exactness():
    trials = 10_000
    s = link.end_to_end_experiment(LinkParams(), 5, 8, trials, seed=7)
    p = 0.96875
    assert abs(s.success_rate - p) <= 3 * math.sqrt(p * (1 - p) / trials)
    assert s.qber_success == 0
    assert s.qber_failure > 0


def test_experiment_infeasible():
    with pytest.raises(link.InfeasibleBudget):
        link.end_to_end_experiment(LinkParams(), 6, 2400, 1, seed=0)


def test_experiment_thread_independent():
    a = link.end_to_end_experiment(LinkParams(), 2, 6, 60, seed=5, threads=1)
    b = link.end_to_end_experiment(LinkParams(), 2, 6, 60, seed=5, threads=3)
    # repr, because nan qber values do not compare equal after pickling
    assert repr(a) == repr(b)
