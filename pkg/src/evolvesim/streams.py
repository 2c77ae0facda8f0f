"""Deterministic random-stream derivation.

Every random decision in the library draws from a stream addressed by a
path of non-negative integers under a single master seed, e.g.

    (run,)                     per-run stream
    (run, step, 0)             mutation pool draws at one generation
    (run, step, 1)             fitness samples for the current representation
    (run, step, 2 + i)         fitness samples for the i-th distinct candidate

Streams are derived with ``numpy.random.SeedSequence`` spawn keys, so any
substream can be reconstructed from (master seed, path) alone. Two distinct
paths never collide, and results are reproducible across processes.
"""
from __future__ import annotations

import numpy as np

__all__ = ["StreamNode"]


class StreamNode:
    """A point in the seed-derivation tree; hands out child nodes and RNGs."""

    def __init__(self, master_seed: int, path: tuple[int, ...] = ()):
        if master_seed < 0:
            raise ValueError("master seed must be non-negative")
        self.master_seed = int(master_seed)
        self.path = tuple(int(p) for p in path)

    def child(self, *indices: int) -> "StreamNode":
        return StreamNode(self.master_seed, self.path + tuple(indices))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=self.path)
        return np.random.Generator(np.random.Philox(seq))

    def __repr__(self) -> str:
        return f"StreamNode(seed={self.master_seed}, path={self.path})"
