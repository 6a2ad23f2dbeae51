"""BB84 raw-key generation, conjugate-basis measurement, sifting and QBER estimation.

Polarization mapping: ``|V> -> |0>`` carries bit 0 and ``|H> -> |1>`` carries
bit 1 in the rectilinear basis; the diagonal pair (pi/4, 3pi/4) maps to
``|+>`` and ``|->``.  The classical channel is an authenticated, lossless
in-process message log.
"""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import quantum as qc


class Basis(enum.IntEnum):
    RECTILINEAR = 0
    DIAGONAL = 1


@dataclass(frozen=True)
class RawKey:
    bits: np.ndarray
    bases: np.ndarray

    def __post_init__(self):
        if len(self.bits) != len(self.bases):
            raise ValueError("bits and bases differ in length")

    def __len__(self) -> int:
        return len(self.bits)


@dataclass(frozen=True)
class SiftedKey:
    bits: np.ndarray
    source_positions: np.ndarray

    def __len__(self) -> int:
        return len(self.bits)


@dataclass
class ClassicalChannel:
    """Public message log shared by Alice and Bob."""

    messages: list[tuple[str, str, object]] = field(default_factory=list)

    def send(self, sender: str, kind: str, payload) -> None:
        self.messages.append((sender, kind, payload))


def generate_raw(n: int, rng: np.random.Generator) -> RawKey:
    if n < 1:
        raise ValueError("raw key length must be >= 1")
    bits = rng.integers(0, 2, size=n, dtype=np.uint8)
    bases = rng.integers(0, 2, size=n, dtype=np.uint8)
    return RawKey(bits, bases)


_ENCODING = {
    (0, Basis.RECTILINEAR): lambda: qc.make_basis_state(1, 0),
    (1, Basis.RECTILINEAR): lambda: qc.make_basis_state(1, 1),
    (0, Basis.DIAGONAL): qc.plus_state,
    (1, Basis.DIAGONAL): qc.minus_state,
}


def encode(raw: RawKey) -> list[qc.StateVector]:
    return [_ENCODING[int(b), Basis(int(s))]() for b, s in zip(raw.bits, raw.bases)]


def measure_in_basis(state: qc.StateVector, basis: int, rng: np.random.Generator) -> int:
    if basis == Basis.DIAGONAL:
        state = qc.apply_gate(state, qc.H, 0)
    record, _ = qc.measure_qubit(state, 0, rng)
    return record.outcome


def measure_with_random_bases(
    states: Sequence[qc.StateVector],
    rng: np.random.Generator,
    bases: Sequence[int] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Bob's measurement; returns (bits, bases).  ``bases`` fixes his choices."""
    if len(states) == 0:
        raise ValueError("nothing to measure")
    if bases is None:
        bases = rng.integers(0, 2, size=len(states), dtype=np.uint8)
    else:
        bases = np.asarray(bases, dtype=np.uint8)
        if len(bases) != len(states):
            raise ValueError("one basis per state required")
    bits = np.fromiter((measure_in_basis(s, b, rng) for s, b in zip(states, bases)), np.uint8, len(states))
    return bits, bases


def sift(
    alice: RawKey,
    bob_bases: Sequence[int],
    bob_bits: Sequence[int],
    channel: ClassicalChannel | None = None,
) -> tuple[SiftedKey, SiftedKey]:
    bob_bases = np.asarray(bob_bases, dtype=np.uint8)
    bob_bits = np.asarray(bob_bits, dtype=np.uint8)
    if not len(alice) == len(bob_bases) == len(bob_bits):
        raise ValueError("sifting inputs differ in length")
    if channel is not None:
        channel.send("bob", "bases", bob_bases.copy())
    keep = np.flatnonzero(alice.bases == bob_bases)
    if channel is not None:
        channel.send("alice", "kept_positions", keep.copy())
    return SiftedKey(alice.bits[keep], keep), SiftedKey(bob_bits[keep], keep)


def qber(a: SiftedKey, b: SiftedKey) -> float:
    """Exact mismatch fraction (simulation ground truth, nothing disclosed)."""
    if len(a) != len(b):
        raise ValueError("keys differ in length")
    if len(a) == 0:
        return float("nan")
    return float(np.mean(a.bits != b.bits))


def estimate_qber(
    a: SiftedKey,
    b: SiftedKey,
    sample_fraction: float,
    rng: np.random.Generator,
    channel: ClassicalChannel | None = None,
) -> tuple[float, SiftedKey, SiftedKey]:
    """Disclose a random sample, return its mismatch rate and the undisclosed remainder."""
    if len(a) != len(b):
        raise ValueError("keys differ in length")
    if not 0 < sample_fraction < 1:
        raise ValueError("sample fraction must lie in (0, 1)")
    m = int(round(sample_fraction * len(a)))
    if m == 0:
        raise ValueError("QBER sample is empty")
    disclosed = np.sort(rng.choice(len(a), size=m, replace=False))
    if channel is not None:
        channel.send("alice", "sample_positions", a.source_positions[disclosed])
        channel.send("alice", "sample_bits", a.bits[disclosed])
    estimate = float(np.mean(a.bits[disclosed] != b.bits[disclosed]))
    rest = np.ones(len(a), dtype=bool)
    rest[disclosed] = False
    return (
        estimate,
        SiftedKey(a.bits[rest], a.source_positions[rest]),
        SiftedKey(b.bits[rest], b.source_positions[rest]),
    )


def write_session_csv(
    path,
    alice: RawKey,
    bob_bases: Sequence[int],
    bob_bits: Sequence[int],
    disclosed_positions: Sequence[int] = (),
) -> None:
    """Audit transcript; ``mismatch`` is filled only on positions disclosed for QBER."""
    disclosed = set(int(p) for p in disclosed_positions)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["position", "alice_basis", "bob_basis", "sifted", "disclosed", "mismatch"])
        for i, (ab, bb) in enumerate(zip(alice.bases, bob_bases)):
            hit = i in disclosed
            w.writerow([
                i, int(ab), int(bb), int(ab == bb), int(hit),
                int(alice.bits[i] != bob_bits[i]) if hit else "",
            ])
