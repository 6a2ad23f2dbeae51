"""Reproducible child random streams.

Every stochastic routine takes an explicit ``numpy.random.Generator``.
Monte-Carlo drivers derive one generator per trial from
``(master_seed, label, trial_index)`` so results do not depend on how
trials are scheduled across workers.
"""
from __future__ import annotations

import zlib
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, TypeVar

import numpy as np

T = TypeVar("T")


def label_key(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


def child_rng(master_seed: int, label: str, index: int = 0) -> np.random.Generator:
    if master_seed < 0 or index < 0:
        raise ValueError("seeds and trial indices must be non-negative")
    seq = np.random.SeedSequence([master_seed & 0xFFFFFFFFFFFFFFFF, label_key(label), index])
    return np.random.Generator(np.random.PCG64(seq))


def make_rng(seed: int | np.random.Generator | None = None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def map_trials(fn: Callable[[int], T], count: int, threads: int = 1) -> list[T]:
    """``[fn(0), ..., fn(count - 1)]``, optionally spread over worker processes.

    ``fn`` must be picklable when ``threads > 1``.  Output order is by index,
    so results never depend on the worker count.
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    if threads == 1 or count < 2:
        return [fn(i) for i in range(count)]
    chunk = max(1, count // (4 * threads))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count), chunksize=chunk))
