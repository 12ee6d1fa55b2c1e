"""Deterministic counter-based random streams.

Streams are Philox generators keyed by ``(seed, stream id)`` with the
step index placed in the high word of the 256-bit counter, so any
``(seed, stream, step)`` triple addresses an independent block of draws
without generating intermediate states.  Per-edge noise is drawn as one
batch per step in fixed edge order, which makes trajectories independent
of thread count by construction and makes runs resumable from a recorded
step index.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "STREAM_INIT",
    "STREAM_LANGEVIN",
    "STREAM_METROPOLIS",
    "STREAM_OBSERVER",
    "STREAM_PAIRS",
    "stream_rng",
]

STREAM_INIT = 0
STREAM_LANGEVIN = 1
STREAM_METROPOLIS = 2
STREAM_OBSERVER = 3
### coupled pair k draws shared noise from stream STREAM_PAIRS + k
STREAM_PAIRS = 16


def stream_rng(seed: int, stream: int, step: int = 0) -> np.random.Generator:
    """Generator for the (seed, stream, step) block of the Philox counter space."""
    key = np.array([np.uint64(seed), np.uint64(stream)], dtype=np.uint64)
    counter = np.array([0, 0, 0, np.uint64(step)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))
