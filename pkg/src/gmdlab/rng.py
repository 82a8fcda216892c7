"""Counter-based random streams.

All randomness in the toolkit flows through Philox (a counter-based 64-bit
generator) keyed by (master seed, substream index).  Identical seeds give
bit-identical streams on every platform, and per-trial substreams make batch
results independent of how trials are scheduled.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def substream(seed: int, index: int = 0) -> np.random.Generator:
    """Generator for substream `index` of master stream `seed`."""
    key = np.array([seed & _MASK64, index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
