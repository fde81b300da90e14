"""Keyed random substreams.

Every draw in the package comes from a Philox generator keyed by
``(master seed, *key)``, so results depend only on the key and never on how
samples are scheduled across workers.
"""

from __future__ import annotations

import numpy as np

# first key element; separates the independent uses of one master seed
OMEGA = 0
POLICY = 1
STAGE = 2
INNER = 3


def substream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def float_key(values) -> tuple[int, ...]:
    """Integer key from the exact bit patterns of some floats."""
    arr = np.ascontiguousarray(np.asarray(values, dtype=np.float64)).view(np.uint64)
    # SeedSequence accepts 32-bit words only
    return tuple(int(w) for w in arr.view(np.uint32))
