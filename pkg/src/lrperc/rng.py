"""Counter-based uniforms keyed by (seed, realization, row, stream).

Philox is a counter-based generator: its output block is a pure function of
the 128-bit key and the 256-bit counter.  We put ``(seed, realization)`` in
the key and ``(row, stream)`` in the upper counter words, so the k-th draw of
a row never depends on which other rows were generated, in what order, or in
which process.
"""

from __future__ import annotations

import numpy as np

MASK_STREAM = 0
ENTRY_STREAM = 1

_U64 = (1 << 64) - 1
# 52 bits: (2^52 - 0.5) / 2^52 is still below 1 in double precision,
# whereas the 53-bit analogue rounds up to exactly 1.0
_INV52 = 1.0 / (1 << 52)


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= _U64:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
    return seed


def row_bits(seed: int, realization: int, row: int, stream: int, count: int) -> np.ndarray:
    """``count`` raw 64-bit words for one (row, stream) of one realization."""
    gen = np.random.Philox(key=[seed, realization], counter=[0, row, stream, 0])
    return gen.random_raw(count)


def open_uniform(bits: np.ndarray) -> np.ndarray:
    """Map 64-bit words to doubles strictly inside (0, 1)."""
    return ((bits >> np.uint64(12)).astype(np.float64) + 0.5) * _INV52


def row_uniforms(seed: int, realization: int, row: int, stream: int, count: int) -> np.ndarray:
    return open_uniform(row_bits(seed, realization, row, stream, count))
