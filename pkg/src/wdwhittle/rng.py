"""Counter-based innovation streams.

Values are generated per block of ``BLOCK`` consecutive time indices with a
Philox generator keyed by ``(seed, stream)`` whose third counter word holds
the block number. The value attached to a time index therefore never depends
on which range was requested, in which order, or on how many workers are
involved.
"""
from __future__ import annotations

import numpy as np

BLOCK = 4096
# time indices may be negative (two-sided filters); shift them onto uint64
_ORIGIN = 1 << 40

_MASK64 = (1 << 64) - 1


def _block_generator(seed: int, stream: int, block: int) -> np.random.Generator:
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    # Philox advances the low counter words while drawing; the block number
    # lives in word 2 so neighbouring blocks never share counter values
    counter = np.array([0, 0, block & _MASK64, 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def draw(sampler, seed: int, stream: int, lo: int, hi: int) -> np.ndarray:
    """Return the values at time indices ``lo, lo+1, ..., hi`` (inclusive).

    Parameters
    ----------
    sampler : callable
        ``sampler(generator, size) -> ndarray``; must consume the generator
        deterministically.
    seed, stream : int
        Key of the stream. Replications use distinct ``stream`` values.
    lo, hi : int
        Inclusive index range; negative indices are allowed.
    """
    if hi < lo:
        return np.empty(0)
    u_lo, u_hi = lo + _ORIGIN, hi + _ORIGIN
    if u_lo < 0:
        raise ValueError("time index below supported range")
    b_lo, b_hi = u_lo // BLOCK, u_hi // BLOCK
    parts = []
    for b in range(b_lo, b_hi + 1):
        values = np.asarray(sampler(_block_generator(seed, stream, b), BLOCK), dtype=np.float64)
        start = max(u_lo - b * BLOCK, 0)
        stop = min(u_hi - b * BLOCK, BLOCK - 1) + 1
        parts.append(values[start:stop])
    return np.concatenate(parts)
