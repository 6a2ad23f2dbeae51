"""Classical Cascade reconciliation, used as the comparison baseline.

Canonical variant: ``passes`` rounds, first block size ``ceil(0.73 / qber)``
doubling every pass, a fresh random permutation from the second pass on,
binary search inside every odd-parity block, and cascading re-checks of the
blocks of earlier passes that contain a flipped bit.  Every parity Alice
discloses is one leaked bit.
"""
from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

MIN_KEY_LENGTH = 16


def qber_from_rotation_probability(p: float) -> float:
    """Adapter onto the efficiency-curve axis: a rotated measurement errs half the time."""
    if not 0 <= p < 1:
        raise ValueError("rotation probability must lie in [0, 1)")
    return p / 2


@dataclass(frozen=True)
class CascadeParams:
    passes: int = 4
    block_factor: float = 0.73

    def __post_init__(self):
        if self.passes < 1:
            raise ValueError("need at least one pass")

    def initial_block(self, qber: float, n: int) -> int:
        return min(max(math.ceil(self.block_factor / qber), 1), n)


@dataclass(frozen=True)
class ParityMessage:
    pass_index: int
    block: int
    kind: str  # "block" (top-level) or "bisect"
    size: int
    parity_a: int
    parity_b: int


@dataclass
class ReconciliationReport:
    corrected: bool
    leaked_bits: int
    final_key_a: np.ndarray
    final_key_b: np.ndarray
    residual_mismatches: int
    transcript: list[ParityMessage] = field(default_factory=list)
    flips: list[tuple[int, int]] = field(default_factory=list)  # (pass, block) per corrected bit

    def write_transcript_csv(self, path) -> None:
        flips_by_block: dict[tuple[int, int], int] = {}
        for key in self.flips:
            flips_by_block[key] = flips_by_block.get(key, 0) + 1
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["pass", "block", "parity_a", "parity_b", "flips"])
            for m in self.transcript:
                if m.kind == "block":
                    w.writerow([m.pass_index, m.block, m.parity_a, m.parity_b,
                                flips_by_block.get((m.pass_index, m.block), 0)])


def reconcile(a, b, qber_estimate: float, params: CascadeParams, rng: np.random.Generator) -> ReconciliationReport:
    a = np.asarray(a, dtype=np.uint8)
    b = np.array(b, dtype=np.uint8)
    n = len(a)
    if len(b) != n:
        raise ValueError("keys differ in length")
    if n < MIN_KEY_LENGTH:
        raise ValueError(f"key length {n} below minimum {MIN_KEY_LENGTH}")
    if not 0 < qber_estimate < 0.5:
        raise ValueError("QBER estimate must lie in (0, 0.5)")

    k1 = params.initial_block(qber_estimate, n)
    transcript: list[ParityMessage] = []
    flips: list[tuple[int, int]] = []
    orders: list[np.ndarray] = []  # pass order of key positions
    block_of: list[np.ndarray] = []  # key position -> block index, per pass
    sizes: list[int] = []
    alice_par: list[np.ndarray] = []

    def block_positions(q: int, blk: int) -> np.ndarray:
        k = sizes[q]
        return orders[q][blk * k:(blk + 1) * k]

    def bisect(q: int, blk: int) -> int:
        pos = block_positions(q, blk)
        while len(pos) > 1:
            half = pos[: len(pos) // 2]
            pa, pb = int(a[half].sum() & 1), int(b[half].sum() & 1)
            transcript.append(ParityMessage(q, blk, "bisect", len(half), pa, pb))
            pos = half if pa != pb else pos[len(pos) // 2:]
        return int(pos[0])

    for p in range(params.passes):
        order = np.arange(n) if p == 0 else rng.permutation(n)
        k = min(k1 * 2**p, n)
        nblocks = -(-n // k)
        inv = np.empty(n, dtype=np.int64)
        inv[order] = np.arange(n)
        orders.append(order)
        sizes.append(k)
        block_of.append(inv // k)

        pa = np.add.reduceat(a[order], np.arange(0, n, k)) & 1
        pb = np.add.reduceat(b[order], np.arange(0, n, k)) & 1
        alice_par.append(pa.astype(np.uint8))
        for j in range(nblocks):
            transcript.append(ParityMessage(p, j, "block", min(k, n - j * k), int(pa[j]), int(pb[j])))

        queue = deque((p, j) for j in np.flatnonzero(pa != pb))
        while queue:
            q, blk = queue.popleft()
            if int(b[block_positions(q, blk)].sum() & 1) == alice_par[q][blk]:
                continue
            pos = bisect(q, blk)
            b[pos] ^= 1
            flips.append((q, blk))
            for qq in range(p + 1):
                if qq != q:
                    queue.append((qq, int(block_of[qq][pos])))

    residual = int(np.count_nonzero(a != b))
    return ReconciliationReport(residual == 0, len(transcript), a.copy(), b, residual, transcript, flips)


def inject_errors(key, qber: float, rng: np.random.Generator) -> np.ndarray:
    """Flip each bit independently with probability ``qber``."""
    key = np.asarray(key, dtype=np.uint8)
    return key ^ (rng.random(len(key)) < qber).astype(np.uint8)


@dataclass(frozen=True)
class CascadeStats:
    n: int
    qber: float
    trials: int
    corrected_runs: int
    mean_leaked: float
    efficiency: float


def cascade_statistics(
    n: int, qber: float, params: CascadeParams, trials: int, rng: np.random.Generator
) -> CascadeStats:
    """Reconcile ``trials`` random key pairs with i.i.d. errors at rate ``qber``.

    ``mean_leaked`` and ``efficiency`` (mean ``1 - leaked/n``) cover only the
    runs that reconciled completely.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    leaked = []
    for _ in range(trials):
        a = rng.integers(0, 2, size=n, dtype=np.uint8)
        b = inject_errors(a, qber, rng)
        report = reconcile(a, b, qber, params, rng)
        if report.corrected:
            leaked.append(report.leaked_bits)
    if not leaked:
        raise ValueError(f"no trial reconciled at qber={qber}")
    mean_leaked = float(np.mean(leaked))
    eff = float(np.mean([1.0 - x / n for x in leaked]))
    return CascadeStats(n, qber, trials, len(leaked), mean_leaked, eff)


def cascade_efficiency(
    n: int, qber: float, params: CascadeParams, trials: int, rng: np.random.Generator
) -> float:
    return cascade_statistics(n, qber, params, trials, rng).efficiency


def write_summary_csv(path, rows: list[CascadeStats]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "qber", "trials", "mean_leaked", "efficiency"])
        for st in rows:
            w.writerow([st.n, f"{st.qber:.17g}", st.trials, f"{st.mean_leaked:.17g}", f"{st.efficiency:.17g}"])
