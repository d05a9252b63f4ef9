"""Counter-based random numbers (Philox4x32-10).

Every uniform is a pure function of ``(seed, run, step, stream)``, so a run's
draws do not depend on how runs are batched or scheduled across threads.
"""

from __future__ import annotations

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)

STREAM_ARRIVAL = 0  # inter-arrival gap and offer value
STREAM_RESIDUAL = 1  # salvage draw at the deadline


def philox4x32(counter, key, rounds: int = 10) -> np.ndarray:
    """Philox4x32 block function.

    Parameters
    ----------
    counter : array_like, shape (4, n) or (4,)
        32-bit counter words.
    key : array_like, shape (2,) or (2, n)
        32-bit key words.

    Returns
    -------
    ndarray of uint32 with the shape of ``counter``.
    """
    ctr = np.asarray(counter, dtype=np.uint64)
    k = np.asarray(key, dtype=np.uint64)
    c0, c1, c2, c3 = ctr[0], ctr[1], ctr[2], ctr[3]
    k0, k1 = k[0], k[1]
    for r in range(rounds):
        if r:
            k0 = (k0 + _W0) & _MASK
            k1 = (k1 + _W1) & _MASK
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (p1 >> _S32) ^ c1 ^ k0, p1 & _MASK, (p0 >> _S32) ^ c3 ^ k1, p0 & _MASK
    return np.stack([c0, c1, c2, c3]).astype(np.uint32)


def _to_unit(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    word = (hi.astype(np.uint64) << _S32) | lo.astype(np.uint64)
    # 53 random bits, centred in their cell: strictly inside (0, 1)
    return ((word >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def split_seed(seed: int) -> tuple[int, int]:
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return seed & 0xFFFFFFFF, seed >> 32


def uniform_pair(seed: int, runs: np.ndarray, step: int, stream: int) -> tuple[np.ndarray, np.ndarray]:
    """Two independent uniforms on (0, 1) for each run at ``step``."""
    runs = np.asarray(runs, dtype=np.uint64)
    k_lo, k_hi = split_seed(seed)
    n = runs.size
    ctr = np.empty((4, n), dtype=np.uint64)
    ctr[0] = step & 0xFFFFFFFF
    ctr[1] = runs & _MASK
    ctr[2] = runs >> _S32
    ctr[3] = stream
    out = philox4x32(ctr, np.array([k_lo, k_hi], dtype=np.uint64))
    return _to_unit(out[0], out[1]), _to_unit(out[2], out[3])
