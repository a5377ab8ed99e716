"""Counter-based uniform random numbers (Philox4x32-10).

Every output is a pure function of (seed, stream index, slot), so per-die
draws are reproducible regardless of generation order, batch size, or
parallelism, and any population is a strict prefix of a longer one.

The block function follows the Philox 4x32, 10-round construction: the seed
forms the key, the (index, slot) pair forms the counter, and each block yields
four 32-bit words that are combined into two 53-bit uniforms in (0, 1).
"""

from __future__ import annotations

import numpy as np

__all__ = ["philox4x32_block", "uniforms"]

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_ROUNDS = 10


def philox4x32_block(counter, key):
    """Run the 10-round Philox 4x32 block function.

    Args:
        counter: sequence of four uint64 arrays (or ints) holding 32-bit words.
        key: sequence of two uint64 arrays (or ints) holding 32-bit words.

    Returns:
        Tuple of four uint64 arrays with the output 32-bit words.
    """
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) for c in counter)
    k0 = np.asarray(key[0], dtype=np.uint64).copy()
    k1 = np.asarray(key[1], dtype=np.uint64).copy()
    for _ in range(_ROUNDS):
        p0 = _M0 * c0  # 32x32 product fits a uint64 exactly
        p1 = _M1 * c2
        hi0, lo0 = p0 >> np.uint64(32), p0 & _MASK32
        hi1, lo1 = p1 >> np.uint64(32), p1 & _MASK32
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
        k0 = (k0 + _W0) & _MASK32
        k1 = (k1 + _W1) & _MASK32
    return c0, c1, c2, c3


def _seed_key(seed: int):
    s = int(seed) & 0xFFFFFFFFFFFFFFFF
    return np.uint64(s & 0xFFFFFFFF), np.uint64((s >> 32) & 0xFFFFFFFF)


def uniforms(seed: int, indices, count: int) -> np.ndarray:
    """Deterministic uniforms in (0, 1), keyed by (seed, stream index, slot).

    Args:
        seed: 64-bit stream key (masked to 64 bits).
        indices: integer array of stream indices (e.g. die indices).
        count: number of uniforms per stream.

    Returns:
        float64 array of shape (len(indices), count); entry [i, j] depends
        only on (seed, indices[i], j).
    """
    idx = np.asarray(indices, dtype=np.uint64)
    if idx.ndim != 1:
        raise ValueError("indices must be one-dimensional")
    if count < 0:
        raise ValueError("count must be >= 0")
    key = _seed_key(seed)
    out = np.empty((idx.size, count), dtype=np.float64)
    idx_lo = idx & _MASK32
    idx_hi = (idx >> np.uint64(32)) & _MASK32
    # One block per pair of slots: words (0,1) -> slot 2b, words (2,3) -> 2b+1.
    for block in range((count + 1) // 2):
        ctr = (idx_lo, idx_hi, np.uint64(block), np.uint64(0))
        w0, w1, w2, w3 = philox4x32_block(ctr, key)
        out[:, 2 * block] = _to_unit(w0, w1)
        if 2 * block + 1 < count:
            out[:, 2 * block + 1] = _to_unit(w2, w3)
    return out


def _to_unit(hi_word, lo_word) -> np.ndarray:
    """Combine two 32-bit words into a 53-bit uniform strictly inside (0, 1)."""
    mantissa = (hi_word >> np.uint64(6)) * np.uint64(1 << 27) + (lo_word >> np.uint64(5))
    return (mantissa.astype(np.float64) + 0.5) * (1.0 / (1 << 53))
