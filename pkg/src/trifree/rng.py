"""Counter-based pseudorandom primitives.

Everything random in this package is derived from 64-bit seeds through the
splitmix64 output permutation.  A value depends only on (seed, counter), never
on call order, so sampling and Monte Carlo trials stay deterministic under any
degree of parallelism.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

# splitmix64 constants (Steele, Lea, Flood 2014).
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(x: int) -> int:
    """The splitmix64 finalizer: a 64-bit avalanche permutation."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & MASK64
    return x ^ (x >> 31)


def stream_value(seed: int, counter: int) -> int:
    """Value at position `counter` of the splitmix64 stream keyed by `seed`."""
    return mix64((seed + (counter + 1) * _GAMMA) & MASK64)


def derive_seed(master: int, index: int) -> int:
    """Child seed for sub-task `index` (per-trial seeds, per-grid-point seeds)."""
    return stream_value(master, index)


def stream_block(seed: int, start: int, count: int) -> np.ndarray:
    """Vectorized ``stream_value`` for counters start..start+count-1 (uint64)."""
    with np.errstate(over="ignore"):
        x = (np.arange(start + 1, start + count + 1, dtype=np.uint64)
             * np.uint64(_GAMMA) + np.uint64(seed & MASK64))
        x ^= x >> np.uint64(30)
        x *= np.uint64(_MIX1)
        x ^= x >> np.uint64(27)
        x *= np.uint64(_MIX2)
        x ^= x >> np.uint64(31)
    return x
