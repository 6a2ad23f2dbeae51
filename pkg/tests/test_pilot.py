import math
from fractions import Fraction

import numpy as np
import pytest

from pilotqkd import pilot
from pilotqkd import quantum as qc
from pilotqkd.channel import rotate


def series_requirement(xi):
    """The pilot-count series written out term by term."""
    total = sum(2 ** (k - 1) * k for k in range(1, xi))  # 2^(xi-2)(xi-1) + ... + 2^0*1
    return total + 1 + xi - 1


def binomial_bound(p, n, sigmas=3):
    return sigmas * math.sqrt(p * (1 - p) / n)


@pytest.mark.parametrize("xi", range(1, 13))
def test_requirement_closed_form_equals_series(xi):
    assert pilot.pilot_requirement(xi) == series_requirement(xi)


@pytest.mark.parametrize("xi, r", [(2, 3), (3, 8), (4, 21), (5, 54), (6, 135)])
def test_requirement_table_values(xi, r):
    assert pilot.pilot_requirement(xi) == r


@pytest.mark.parametrize("xi, p", [(1, 0.5), (2, 0.75), (5, 0.96875)])
def test_success_probability(xi, p):
    assert pilot.success_probability(xi) == p


def test_guards():
    for fn in (pilot.pilot_requirement, pilot.success_probability):
        with pytest.raises(ValueError):
            fn(0)
    with pytest.raises(ValueError):
        pilot.PilotString(0.3, 0)
    with pytest.raises(ValueError):
        pilot.budget_table([21])


def test_budget_table():
    rows = pilot.budget_table(range(2, 7))
    assert [(b.r, b.p_success) for b in rows] == [
        (3, 0.75), (8, 0.875), (21, 0.9375), (54, 0.96875), (135, 0.984375)
    ]
    (row10,) = pilot.budget_table([10])
    assert row10.r == series_requirement(10) == 4107
    assert Fraction(row10.p_success) == 1 - Fraction(1, 1024)


def test_pilot_string_doubles_angles():
    ps = pilot.PilotString(1.0, 6)
    for i, a in enumerate(ps.angles):
        assert a == pytest.approx((2**i * 1.0) % (2 * math.pi), abs=1e-12)


def test_attempt_branches():
    th = math.pi / 3
    d = rotate(qc.plus_state(), th, [0])
    seen = set()
    for seed in range(40):
        ok, out = pilot.correction_attempt(d, 0, th, np.random.default_rng(seed))
        target = qc.plus_state() if ok else rotate(qc.plus_state(), 2 * th, [0])
        assert qc.fidelity(out, target) == pytest.approx(1, abs=1e-9)
        assert out.num_qubits == 1
        seen.add(ok)
    assert seen == {True, False}


def test_attempt_probability_exactly_half():
    rng = np.random.default_rng(2)
    for _ in range(100):
        n = int(rng.integers(1, 4))
        psi = qc.random_state(n, rng)
        th = rng.uniform(0, 2 * math.pi)
        q = int(rng.integers(n))
        p0 = pilot.attempt_success_probability(rotate(psi, th, [q]), q, th)
        assert abs(p0 - 0.5) < 1e-12


def test_branch_algebra_random_pairs():
    rng = np.random.default_rng(4)
    for _ in range(100):
        psi, th = qc.random_state(1, rng), rng.uniform(0, 2 * math.pi)
        ok, out = pilot.correction_attempt(rotate(psi, th, [0]), 0, th, rng)
        if not ok:
            assert qc.fidelity(out, rotate(psi, 2 * th, [0])) == pytest.approx(1, abs=1e-9)


def test_attempt_on_entangled_register_qubit():
    # correcting qubit 1 of a damaged Bell pair only undoes that qubit's rotation
    bell = qc.StateVector(np.array([1, 0, 0, 1]) / math.sqrt(2))
    th = 1.1
    d = rotate(bell, th, [1])
    for seed in range(10):
        ok, out = pilot.correction_attempt(d, 1, th, np.random.default_rng(seed))
        target = bell if ok else rotate(bell, 2 * th, [1])
        assert qc.fidelity(out, target) == pytest.approx(1, abs=1e-9)


def test_chain_xi1_is_single_attempt():
    th = 0.8
    d = rotate(qc.plus_state(), th, [0])
    for seed in range(20):
        res = pilot.correction_chain(d, 0, pilot.PilotString(th, 1), np.random.default_rng(seed))
        ok, out = pilot.correction_attempt(d, 0, th, np.random.default_rng(seed))
        assert res.success == ok and res.attempts_used == 1
        assert qc.fidelity(res.output_state, out) == pytest.approx(1, abs=1e-12)


def test_chain_identity_channel():
    psi = qc.random_state(1, np.random.default_rng(0))
    for seed in range(10):
        res = pilot.correction_chain(psi, 0, pilot.PilotString(0.0, 4), np.random.default_rng(seed))
        assert qc.fidelity(res.output_state, psi) == pytest.approx(1, abs=1e-12)


def test_chain_result_invariants_and_residuals():
    rng = np.random.default_rng(10)
    for _ in range(400):
        xi = int(rng.integers(1, 5))
        th = rng.uniform(0, 2 * math.pi)
        psi = qc.random_state(1, rng)
        res = pilot.correction_chain(rotate(psi, th, [0]), 0, pilot.PilotString(th, xi), rng)
        assert 1 <= res.attempts_used <= xi
        if res.success:
            assert res.residual_exponent == 0
            assert qc.fidelity(res.output_state, psi) >= 1 - 1e-9
        else:
            assert res.residual_exponent == xi and res.attempts_used == xi
            assert qc.fidelity(res.output_state, rotate(psi, 2**xi * th, [0])) >= 1 - 1e-9


@pytest.mark.parametrize("xi", range(1, 7))
def test_chain_success_rate(xi):
    rng = np.random.default_rng(100 + xi)
    th = 2.2
    d = rotate(qc.plus_state(), th, [0])
    n = 20_000
    wins = sum(pilot.correction_chain(d, 0, pilot.PilotString(th, xi), rng).success for _ in range(n))
    p = 1 - 2.0**-xi
    assert abs(wins / n - p) <= binomial_bound(p, n)


def test_register_n1_matches_chain_transcripts():
    th = 1.9
    d = rotate(qc.plus_state(), th, [0])
    ps = pilot.PilotString(th, 4)
    for seed in range(200):
        a = pilot.correction_chain(d, 0, ps, np.random.default_rng(seed))
        b = pilot.correct_register(d, None, ps, np.random.default_rng(seed))
        assert a.transcript == b.transcript and a.success == b.success
        assert qc.fidelity(a.output_state, b.output_state) == pytest.approx(1, abs=1e-9)


def test_register_bell_state_success():
    bell = qc.StateVector(np.array([1, 0, 0, 1]) / math.sqrt(2))
    th = math.pi / 4
    d = rotate(bell, th, [0, 1])
    successes = 0
    for seed in range(50):
        for fn in (pilot.correct_register, pilot.correct_register_joint):
            res = fn(d, None, pilot.PilotString(th, 2), np.random.default_rng(seed))
            if res.success:
                successes += 1
                assert qc.fidelity(res.output_state, bell) == pytest.approx(1, abs=1e-9)
            else:
                assert qc.fidelity(res.output_state, rotate(bell, 4 * th, [0, 1])) == pytest.approx(1, abs=1e-9)
    assert successes > 0


def test_register_product_form_beyond_capacity():
    n = 40  # beyond the 24-qubit state-vector guard
    th = 0.6
    rng = np.random.default_rng(5)
    psis = [qc.random_state(1, rng) for _ in range(n)]
    damaged = [rotate(p, th, [0]) for p in psis]
    res = pilot.correct_register(damaged, None, pilot.PilotString(th, 3), np.random.default_rng(1))
    targets = psis if res.success else [rotate(p, 8 * th, [0]) for p in psis]
    assert len(res.output_state) == n
    assert all(qc.fidelity(o, t) == pytest.approx(1, abs=1e-9) for o, t in zip(res.output_state, targets))


def test_register_rejects_mixed_channels():
    reg = [qc.plus_state()] * 3
    with pytest.raises(ValueError):
        pilot.correct_register(reg, None, pilot.PilotString(0.5, 2), np.random.default_rng(0),
                               channel_angles=[0.5, 0.5, 0.7])
    pilot.correct_register(reg, None, pilot.PilotString(0.5, 2), np.random.default_rng(0),
                           channel_angles=[0.5, 0.5 + 2 * math.pi, 0.5])


@pytest.mark.parametrize("n", [1, 4, 16])
def test_register_success_independent_of_length(n):
    trials = 10_000
    rng = np.random.default_rng(1000 + n)
    reg = [qc.plus_state()] * n
    wins = sum(pilot.correct_register(reg, None, pilot.PilotString(1.0, 3), rng).success
               for _ in range(trials))
    assert abs(wins / trials - 0.875) <= binomial_bound(0.875, trials)


def test_factored_matches_joint_per_seed():
    rng = np.random.default_rng(8)
    xi = 3
    for trial in range(300):
        n = int(rng.integers(1, 6))
        th = rng.uniform(0, 2 * math.pi)
        psi = qc.random_state(n, rng)
        d = rotate(psi, th, list(range(n)))
        ps = pilot.PilotString(th, xi)
        a = pilot.correct_register(d, None, ps, np.random.default_rng(trial))
        b = pilot.correct_register_joint(d, None, ps, np.random.default_rng(trial))
        assert a.transcript == b.transcript
        assert qc.fidelity(a.output_state, b.output_state) == pytest.approx(1, abs=1e-9)
