"""Dense state-vector engine.

Qubit 0 is the most significant bit of the basis index, so ``|10>`` is
index 2 of a two-qubit register.  States are compared by fidelity, never
amplitude-wise, because the rotation gate is only fixed up to a global
phase.
"""
from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 24
NORM_TOL = 1e-9
UNITARY_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

# Test hook for the verify command: flips the sign of the cosine term of U_theta.
_FAULTS: set[str] = set()


class CapacityError(ValueError):
    """Requested register would exceed :data:`MAX_QUBITS`."""


@contextlib.contextmanager
def inject_fault(name: str = "u_theta_sign"):
    """Temporarily corrupt :func:`gate_u_theta` (sabotage hook for self-checks)."""
    _FAULTS.add(name)
    try:
        yield
    finally:
        _FAULTS.discard(name)


def _check_capacity(num_qubits: int) -> None:
    if num_qubits > MAX_QUBITS:
        raise CapacityError(f"{num_qubits} qubits exceeds the {MAX_QUBITS}-qubit guard")


class StateVector:
    """Normalized pure state on ``num_qubits`` qubits.

    The amplitude array is read-only; every operation returns a new state.
    """

    __slots__ = ("_amps", "num_qubits")

    def __init__(self, amplitudes, *, check: bool = True):
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        n = amps.size.bit_length() - 1
        if amps.size < 2 or 1 << n != amps.size:
            raise ValueError(f"amplitude count {amps.size} is not a power of two >= 2")
        _check_capacity(n)
        if check:
            if not np.all(np.isfinite(amps)):
                raise ValueError("non-finite amplitude")
            norm = float(np.vdot(amps, amps).real)
            if abs(norm - 1.0) > NORM_TOL:
                raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        amps.flags.writeable = False
        self._amps = amps
        self.num_qubits = n

    @classmethod
    def _trusted(cls, amps: np.ndarray) -> StateVector:
        # Internal constructor for results of unitary operations.
        obj = cls.__new__(cls)
        amps.flags.writeable = False
        obj._amps = amps
        obj.num_qubits = amps.size.bit_length() - 1
        return obj

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amps

    def norm_squared(self) -> float:
        return float(np.vdot(self._amps, self._amps).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self._amps) ** 2

    def __len__(self) -> int:
        return self._amps.size

    def __repr__(self) -> str:
        return f"StateVector({np.array2string(self._amps, precision=4)})"


@dataclass(frozen=True)
class MeasurementRecord:
    qubit_index: int
    outcome: int
    outcome_probability: float


def fidelity(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|^2``."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("fidelity between registers of different size")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def make_basis_state(num_qubits: int, basis_index: int) -> StateVector:
    if num_qubits < 1:
        raise ValueError("need at least one qubit")
    _check_capacity(num_qubits)
    if not 0 <= basis_index < 1 << num_qubits:
        raise IndexError(f"basis index {basis_index} out of range for {num_qubits} qubits")
    amps = np.zeros(1 << num_qubits, dtype=complex)
    amps[basis_index] = 1.0
    return StateVector._trusted(amps)


def plus_state() -> StateVector:
    return StateVector._trusted(np.array([1, 1], dtype=complex) / math.sqrt(2))


def minus_state() -> StateVector:
    return StateVector._trusted(np.array([1, -1], dtype=complex) / math.sqrt(2))


def random_state(num_qubits: int, rng: np.random.Generator) -> StateVector:
    """Haar-random pure state (normalized complex Gaussian)."""
    _check_capacity(num_qubits)
    dim = 1 << num_qubits
    amps = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return StateVector._trusted(amps / math.sqrt(np.vdot(amps, amps).real))


def gate_u_theta(theta: float) -> np.ndarray:
    """Channel rotation ``cos(theta/2) I + i sin(theta/2) Z = diag(e^{i theta/2}, e^{-i theta/2})``."""
    if not math.isfinite(theta):
        raise ValueError(f"non-finite rotation angle {theta!r}")
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if "u_theta_sign" in _FAULTS:
        c = -c
    return np.array([[c + 1j * s, 0], [0, c - 1j * s]], dtype=complex)


def is_unitary(gate: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    gate = np.asarray(gate)
    dim = gate.shape[0]
    return bool(np.max(np.abs(gate.conj().T @ gate - np.eye(dim))) < tol)


def pilot_state(theta: float) -> StateVector:
    """Pilot qubit ``cos(theta/2)|0> + i sin(theta/2)|1>`` for ``theta`` in [0, 2pi)."""
    if not (math.isfinite(theta) and 0.0 <= theta < 2 * math.pi):
        raise ValueError(f"pilot angle {theta!r} outside [0, 2pi)")
    half = theta / 2
    return StateVector._trusted(np.array([math.cos(half), 1j * math.sin(half)]))


def _check_target(state: StateVector, *targets: int) -> None:
    for t in targets:
        if not 0 <= t < state.num_qubits:
            raise IndexError(f"qubit {t} out of range for {state.num_qubits}-qubit state")


def _apply_1q(amps: np.ndarray, n: int, gate: np.ndarray, t: int) -> np.ndarray:
    return (gate @ amps.reshape(1 << t, 2, -1)).reshape(-1)


def _apply_2q(amps: np.ndarray, n: int, gate: np.ndarray, q0: int, q1: int) -> np.ndarray:
    if q1 == q0 + 1:
        return (gate @ amps.reshape(1 << q0, 4, -1)).reshape(-1)
    op = gate.reshape(2, 2, 2, 2)
    if q0 > q1:
        q0, q1 = q1, q0
        op = op.transpose(1, 0, 3, 2)
    psi = amps.reshape(1 << q0, 2, 1 << (q1 - q0 - 1), 2, -1)
    return np.einsum("ijkl,akblc->aibjc", op, psi).reshape(-1)


def _apply_matrix(amps: np.ndarray, n: int, matrix: np.ndarray, targets: tuple[int, ...]) -> np.ndarray:
    if len(targets) == 1:
        return _apply_1q(amps, n, matrix, targets[0])
    if len(targets) == 2:
        return _apply_2q(amps, n, matrix, *targets)
    k = len(targets)
    psi = amps.reshape((2,) * n)
    op = matrix.reshape((2,) * (2 * k))
    out = np.tensordot(op, psi, axes=(tuple(range(k, 2 * k)), targets))
    # tensordot puts the acted-on axes first; move them back in place.
    out = np.moveaxis(out, tuple(range(k)), targets)
    return np.ascontiguousarray(out).reshape(-1)


def apply_gate(state: StateVector, gate: np.ndarray, target: int) -> StateVector:
    _check_target(state, target)
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (2, 2):
        raise ValueError("expected a 2x2 gate")
    return StateVector._trusted(_apply_matrix(state.amplitudes, state.num_qubits, gate, (target,)))


def apply_two_qubit(state: StateVector, gate: np.ndarray, q0: int, q1: int) -> StateVector:
    """Apply a 4x4 gate with ``q0`` as the high bit of its index."""
    _check_target(state, q0, q1)
    if q0 == q1:
        raise ValueError("two-qubit gate needs distinct qubits")
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (4, 4):
        raise ValueError("expected a 4x4 gate")
    return StateVector._trusted(_apply_matrix(state.amplitudes, state.num_qubits, gate, (q0, q1)))


def controlled(gate: np.ndarray) -> np.ndarray:
    out = np.eye(4, dtype=complex)
    out[2:, 2:] = gate
    return out


def apply_controlled(state: StateVector, control: int, target: int, gate: np.ndarray) -> StateVector:
    """Apply ``gate`` to ``target`` on the ``control = 1`` subspace."""
    if control == target:
        raise ValueError("control and target must differ")
    _check_target(state, control, target)
    n = state.num_qubits
    psi = np.array(state.amplitudes).reshape((2,) * n)
    index: list = [slice(None)] * n
    index[control] = 1
    sub = psi[tuple(index)]
    # removing the control axis shifts later axes down by one
    t = target - (target > control)
    psi[tuple(index)] = np.moveaxis(np.tensordot(gate, sub, axes=([1], [t])), 0, t)
    return StateVector._trusted(psi.reshape(-1))


def tensor(a: StateVector, b: StateVector) -> StateVector:
    _check_capacity(a.num_qubits + b.num_qubits)
    return StateVector._trusted(np.outer(a.amplitudes, b.amplitudes).reshape(-1))


def _split(state: StateVector, target: int) -> np.ndarray:
    return state.amplitudes.reshape(1 << target, 2, -1)


def outcome_probability(state: StateVector, target: int, outcome: int = 0) -> float:
    """Born probability of ``outcome`` on ``target``."""
    _check_target(state, target)
    branch = _split(state, target)[:, outcome, :]
    return float(np.vdot(branch, branch).real)


def _sample(state: StateVector, target: int, rng: np.random.Generator):
    psi = _split(state, target)
    b0 = psi[:, 0, :]
    p0 = min(max(float(np.vdot(b0, b0).real), 0.0), 1.0)
    outcome = 0 if rng.random() < p0 else 1
    prob = p0 if outcome == 0 else 1.0 - p0
    if prob < 1e-15:
        raise RuntimeError("sampled a zero-probability measurement branch")
    return psi, outcome, prob


def measure_qubit(
    state: StateVector, target: int, rng: np.random.Generator
) -> tuple[MeasurementRecord, StateVector]:
    """Projective computational-basis measurement of one qubit.

    Consumes exactly one ``rng.random()`` draw: outcome 0 iff the draw is
    below the Born probability of 0.  The returned state keeps the measured
    qubit, collapsed and renormalized.
    """
    _check_target(state, target)
    psi, outcome, prob = _sample(state, target, rng)
    out = np.zeros_like(psi)
    out[:, outcome, :] = psi[:, outcome, :] / math.sqrt(prob)
    return MeasurementRecord(target, outcome, prob), StateVector._trusted(out.reshape(-1))


def measure_and_discard(
    state: StateVector, target: int, rng: np.random.Generator
) -> tuple[MeasurementRecord, StateVector]:
    """Like :func:`measure_qubit` but removes the measured qubit from the register."""
    _check_target(state, target)
    if state.num_qubits == 1:
        raise ValueError("cannot discard the only qubit")
    psi, outcome, prob = _sample(state, target, rng)
    out = psi[:, outcome, :].reshape(-1) / math.sqrt(prob)
    return MeasurementRecord(target, outcome, prob), StateVector._trusted(out)


def couple_and_measure(
    state: StateVector, ancilla: StateVector, gate: np.ndarray, target: int, rng: np.random.Generator
) -> tuple[MeasurementRecord, StateVector]:
    """Append a one-qubit ``ancilla``, apply ``gate`` on (target, ancilla), then measure and discard it.

    Equivalent to ``tensor`` + ``apply_two_qubit`` + ``measure_and_discard``
    (same single draw), without the intermediate wrappers.
    """
    _check_target(state, target)
    n = state.num_qubits
    _check_capacity(n + 1)
    # fold the ancilla into the gate: (d'a', d) acting on the target axis only
    op = np.asarray(gate, dtype=complex).reshape(4, 2, 2) @ ancilla.amplitudes
    psi = (op @ state.amplitudes.reshape(1 << target, 2, -1)).reshape(1 << target, 2, 2, -1)
    b0 = psi[:, :, 0, :]
    p0 = min(max(float(np.vdot(b0, b0).real), 0.0), 1.0)
    outcome = 0 if rng.random() < p0 else 1
    prob = p0 if outcome == 0 else 1.0 - p0
    if prob < 1e-15:
        raise RuntimeError("sampled a zero-probability measurement branch")
    out = psi[:, :, outcome, :].reshape(-1) / math.sqrt(prob)
    return MeasurementRecord(n, outcome, prob), StateVector._trusted(out)


def drop_qubit(state: StateVector, target: int) -> StateVector:
    """Remove a qubit known to be in a computational basis state."""
    _check_target(state, target)
    if state.num_qubits == 1:
        raise ValueError("cannot drop the only qubit")
    p0 = outcome_probability(state, target, 0)
    if p0 > 1 - NORM_TOL:
        bit = 0
    elif p0 < NORM_TOL:
        bit = 1
    else:
        raise ValueError(f"qubit {target} is entangled or in superposition (p0 = {p0:.3g})")
    return StateVector._trusted(np.ascontiguousarray(_split(state, target)[:, bit, :]).reshape(-1))


def density_conjugate(rho, theta: float) -> np.ndarray:
    """Return ``U_theta rho U_theta^dagger`` for a single-qubit density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError("expected a 2x2 density matrix")
    if np.max(np.abs(rho - rho.conj().T)) > UNITARY_TOL:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > UNITARY_TOL:
        raise ValueError("density matrix trace deviates from 1")
    if np.min(np.linalg.eigvalsh(rho)) < -UNITARY_TOL:
        raise ValueError("density matrix is not positive semidefinite")
    u = gate_u_theta(theta)
    return u @ rho @ u.conj().T
