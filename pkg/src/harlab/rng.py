"""Deterministic random numbers for every resampling and training step.

The generator is SplitMix64 used in counter mode: output ``i`` of a stream
seeded with ``s`` is ``mix64(s + (i + 1) * GOLDEN)`` where ``mix64`` is the
SplitMix64 finalizer (xor-shift / multiply rounds).  Counter mode means a
whole stream can be produced as one vectorized uint64 computation, so results
are bit-identical across platforms and independent of evaluation order.

Operation seeds are never reused directly: each call site derives its own
seed from the master seed plus a fixed string tag (``derive_seed``), so adding
a new consumer of randomness cannot shift the streams of existing ones.
"""

from __future__ import annotations

import numpy as np

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# FNV-1a 64-bit, used only to fold string tags into integers.
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a python int, reduced mod 2**64."""
    z &= 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 30)) * _MIX1) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * _MIX2) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


def derive_seed(master: int, *tags: int | str) -> int:
    """Mix a master seed with operation tags into a fresh 64-bit seed.

    Tags may be strings (call-site names) or integers (loop indices).  The
    result is deterministic and, for distinct tag tuples, effectively
    independent.
    """
    h = mix64(master)
    for tag in tags:
        if isinstance(tag, str):
            f = _FNV_OFFSET
            for b in tag.encode("utf-8"):
                f = ((f ^ b) * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
            t = f
        else:
            t = int(tag) & 0xFFFFFFFFFFFFFFFF
        h = mix64(h ^ mix64(t ^ _GOLDEN))
    return h


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    with np.errstate(over="ignore"):
        z ^= z >> np.uint64(30)
        z *= np.uint64(_MIX1)
        z ^= z >> np.uint64(27)
        z *= np.uint64(_MIX2)
        z ^= z >> np.uint64(31)
    return z


def bits(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """``n`` raw uint64 outputs of the stream, starting at ``offset``."""
    idx = np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        ctr = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * np.uint64(_GOLDEN)
    return _mix64_vec(ctr)


def uniform(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """``n`` float64 samples in [0, 1) using the top 53 bits."""
    return (bits(seed, n, offset) >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


def permutation(seed: int, n: int) -> np.ndarray:
    """Deterministic permutation of range(n) by sorting random keys."""
    return np.argsort(bits(seed, n), kind="stable")


def randint(seed: int, n: int, bound: int, offset: int = 0) -> np.ndarray:
    """``n`` ints uniform on [0, bound).  Bias is O(bound / 2**53): negligible
    for the dataset-scale bounds used here."""
    return np.minimum((uniform(seed, n, offset) * bound).astype(np.int64), bound - 1)


def normal(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """``n`` standard normal samples via Box-Muller on stream pairs."""
    m = (n + 1) // 2
    u = uniform(seed, 2 * m, offset)
    u1 = np.maximum(u[:m], 2.0 ** -53)  # avoid log(0)
    u2 = u[m:]
    r = np.sqrt(-2.0 * np.log(u1))
    out = np.concatenate([r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)])
    return out[:n]


class Stream:
    """Stateful view over a counter-based stream, for sequential consumers
    (per-node feature draws inside tree building)."""

    def __init__(self, seed: int):
        self.seed = seed & 0xFFFFFFFFFFFFFFFF
        self.offset = 0

    def take_bits(self, n: int) -> np.ndarray:
        out = bits(self.seed, n, self.offset)
        self.offset += n
        return out

    def take_uniform(self, n: int) -> np.ndarray:
        out = uniform(self.seed, n, self.offset)
        self.offset += n
        return out

    def take_permutation(self, n: int) -> np.ndarray:
        return np.argsort(self.take_bits(n), kind="stable")
