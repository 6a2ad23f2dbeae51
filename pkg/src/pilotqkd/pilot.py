"""Redundancy-free pilot correction of phase-rotation errors.

A damaged qubit ``U_theta|psi>`` is paired with a pilot ``|theta>``.  The
interaction H(pilot), CNOT(data -> pilot), X(pilot) followed by a pilot
measurement leaves the data in ``U_theta^dagger U_theta|psi> = |psi>`` on
outcome 0 and in ``U_theta U_theta|psi> = U_{2 theta}|psi>`` on outcome 1,
each with probability exactly 1/2.  A failed attempt therefore doubles the
residual angle, so a string of pilots at ``theta, 2 theta, ..., 2^(xi-1)
theta`` corrects with probability ``1 - 2^-xi``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from . import quantum as qc
from .channel import rotate

TWO_PI = 2 * math.pi

# Rows are indexed (data bit, pilot bit) with the data qubit as the high bit.
_PILOT_INTERACTION = (
    np.kron(qc.I2, qc.X) @ np.array(qc.controlled(qc.X)) @ np.kron(qc.I2, qc.H)
)

Register = Union[qc.StateVector, Sequence[qc.StateVector]]


def pilot_requirement(xi: int) -> int:
    """Number of ``|theta>`` pilot states needed to provision a string of length ``xi``.

    Closed form of ``sum_{k=1}^{xi-1} k 2^(k-1) + 1 + (xi - 1)``.
    """
    if xi < 1:
        raise ValueError("pilot string length must be >= 1")
    return (xi - 2) * 2 ** (xi - 1) + xi + 1


def success_probability(xi: int) -> float:
    if xi < 1:
        raise ValueError("pilot string length must be >= 1")
    return float(1 - Fraction(1, 2**xi))


@dataclass(frozen=True)
class PilotBudget:
    xi: int
    r: int
    p_success: float


def budget_table(xi_range: Sequence[int] = range(2, 7)) -> list[PilotBudget]:
    rows = []
    for xi in xi_range:
        if not 1 <= xi <= 20:
            raise ValueError(f"xi = {xi} outside 1..20")
        rows.append(PilotBudget(xi, pilot_requirement(xi), success_probability(xi)))
    return rows


@dataclass(frozen=True)
class PilotString:
    base_theta: float
    xi: int

    def __post_init__(self):
        if self.xi < 1:
            raise ValueError("empty pilot string")
        if not math.isfinite(self.base_theta):
            raise ValueError("non-finite pilot angle")

    @property
    def angles(self) -> list[float]:
        # doubling mod 2pi one step at a time keeps the angle small
        out, a = [], self.base_theta % TWO_PI
        for _ in range(self.xi):
            out.append(a)
            a = (2 * a) % TWO_PI
        return out


@dataclass(frozen=True)
class CorrectionResult:
    success: bool
    attempts_used: int
    residual_exponent: int
    output_state: qc.StateVector | tuple[qc.StateVector, ...]
    transcript: tuple[int, ...] = ()


def correction_attempt(
    damaged: qc.StateVector, data_qubit: int, pilot_theta: float, rng: np.random.Generator
) -> tuple[bool, qc.StateVector]:
    """One pilot interaction on ``data_qubit``; returns (success, data register)."""
    record, state = _attempt(damaged, data_qubit, pilot_theta, rng)
    return record.outcome == 0, state


def _attempt(damaged, data_qubit, pilot_theta, rng):
    pilot = qc.pilot_state(pilot_theta % TWO_PI)
    return qc.couple_and_measure(damaged, pilot, _PILOT_INTERACTION, data_qubit, rng)


def attempt_success_probability(damaged: qc.StateVector, data_qubit: int, pilot_theta: float) -> float:
    """Born probability of the pilot's 'correct' outcome, computed without sampling."""
    pilot = qc.pilot_state(pilot_theta % TWO_PI)
    joint = qc.apply_two_qubit(qc.tensor(damaged, pilot), _PILOT_INTERACTION, data_qubit, damaged.num_qubits)
    return qc.outcome_probability(joint, damaged.num_qubits, 0)


def correction_chain(
    damaged: qc.StateVector, data_qubit: int, pilots: PilotString, rng: np.random.Generator
) -> CorrectionResult:
    """Repeat-until-success over a doubling pilot string."""
    state = damaged
    transcript = []
    for i, angle in enumerate(pilots.angles, start=1):
        record, state = _attempt(state, data_qubit, angle, rng)
        transcript.append(record.outcome)
        if record.outcome == 0:
            return CorrectionResult(True, i, 0, state, tuple(transcript))
    return CorrectionResult(False, pilots.xi, pilots.xi, state, tuple(transcript))


def _check_same_channel(pilots: PilotString, channel_angles) -> None:
    if channel_angles is None:
        return
    base = pilots.base_theta % TWO_PI
    for a in channel_angles:
        d = abs((a - base + math.pi) % TWO_PI - math.pi)
        if d > 1e-12:
            raise ValueError("register qubits were damaged by different channel angles")


def _transcript(xi: int, rng: np.random.Generator) -> tuple[bool, int, tuple[int, ...]]:
    # One draw per attempt, outcome 0 iff draw < 1/2: same consumption as measure_qubit.
    outcomes = []
    for i in range(1, xi + 1):
        outcome = 0 if rng.random() < 0.5 else 1
        outcomes.append(outcome)
        if outcome == 0:
            return True, i, tuple(outcomes)
    return False, xi, tuple(outcomes)


def correct_register(
    damaged_register: Register,
    data_qubits: Sequence[int] | None,
    pilots: PilotString,
    rng: np.random.Generator,
    *,
    channel_angles: Sequence[float] | None = None,
) -> CorrectionResult:
    """Correct a whole register damaged by one channel angle with a single chain.

    The pilot outcomes never depend on the data, so the chain is sampled once
    and its net effect applied qubit by qubit: ``U_theta^dagger`` on success,
    ``U_{(2^xi - 1) theta}`` after ``xi`` failures.  ``damaged_register`` may be
    a :class:`StateVector` or a sequence of single-qubit states (a product
    register of any length).  ``channel_angles`` lists the per-qubit damage
    angles when known, and a register mixing channels is rejected.
    """
    _check_same_channel(pilots, channel_angles)
    success, attempts, transcript = _transcript(pilots.xi, rng)
    theta = pilots.base_theta % TWO_PI
    # net rotation applied by the chain: U_theta^dagger, or U_{2^xi theta} U_theta^dagger
    net = -theta if success else (_doubled(theta, pilots.xi) - theta) % TWO_PI
    residual = 0 if success else pilots.xi

    if isinstance(damaged_register, qc.StateVector):
        targets = range(damaged_register.num_qubits) if data_qubits is None else data_qubits
        out = rotate(damaged_register, net, list(targets))
    else:
        qubits = list(damaged_register)
        idx = range(len(qubits)) if data_qubits is None else data_qubits
        gate = qc.gate_u_theta(net)
        for i in idx:
            q = qubits[i]
            if q.num_qubits != 1:
                raise ValueError("product registers must hold single-qubit states")
            qubits[i] = qc.StateVector._trusted(gate @ q.amplitudes)
        out = tuple(qubits)
    return CorrectionResult(success, attempts, residual, out, transcript)


def _doubled(theta: float, k: int) -> float:
    a = theta % TWO_PI
    for _ in range(k):
        a = (2 * a) % TWO_PI
    return a


def correct_register_joint(
    damaged_register: qc.StateVector,
    data_qubits: Sequence[int] | None,
    pilots: PilotString,
    rng: np.random.Generator,
) -> CorrectionResult:
    """Reference path: simulate register plus pilot as one state vector.

    Each attempt appends the pilot ``|phi>``, converts it to ``|+>`` with
    ``U_phi^dagger H``, applies ``U_phi^dagger`` to every data qubit and then
    ``U_{2 phi}`` controlled by the pilot, so pilot outcome 0 leaves
    ``U_phi^dagger`` and outcome 1 leaves ``U_phi`` on the whole register.
    Limited by the state-vector capacity; used to cross-check
    :func:`correct_register`.
    """
    n = damaged_register.num_qubits
    targets = list(range(n)) if data_qubits is None else list(data_qubits)
    state = damaged_register
    transcript = []
    for i, phi in enumerate(pilots.angles, start=1):
        joint = qc.tensor(state, qc.pilot_state(phi))
        joint = qc.apply_gate(joint, qc.H, n)
        joint = qc.apply_gate(joint, qc.gate_u_theta(-phi), n)
        inv = qc.gate_u_theta(-phi)
        dbl = qc.gate_u_theta(2 * phi)
        for t in targets:
            joint = qc.apply_gate(joint, inv, t)
            joint = qc.apply_controlled(joint, n, t, dbl)
        record, state = qc.measure_and_discard(joint, n, rng)
        transcript.append(record.outcome)
        if record.outcome == 0:
            return CorrectionResult(True, i, 0, state, tuple(transcript))
    return CorrectionResult(False, pilots.xi, pilots.xi, state, tuple(transcript))
