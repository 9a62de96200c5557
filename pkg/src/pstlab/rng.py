"""Deterministic random streams.

All randomness flows through Philox (counter-based, 4x64) generators keyed
by an integer seed plus an optional tuple of stream keys.  Substreams are
independent of evaluation order and thread count, so any parallel map over
seeded work items reduces to the same result as the serial loop.
"""

from __future__ import annotations

import numpy as np

__all__ = ["substream", "child_seed"]


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Generator for the stream identified by ``(seed, *keys)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, keys)])))


def child_seed(seed: int, *keys: int) -> int:
    """A 63-bit seed derived deterministically from ``(seed, *keys)``."""
    state = np.random.SeedSequence([int(seed), *map(int, keys)]).generate_state(1, np.uint64)[0]
    return int(state >> np.uint64(1))
