"""Reproducible random streams.

Every task (a simulated dataset, a chain, a replication) owns its own
``numpy.random.Generator`` backed by the counter-based Philox bit generator.
Child seeds are derived from ``(master, index)`` through ``SeedSequence``
spawn keys, so replication ``r`` of a study is reproducible on its own.
"""
from __future__ import annotations

import numpy as np

__all__ = ["derive", "make_rng"]


def derive(master: int, *index: int) -> int:
    """Return a 63-bit child seed for ``master`` at position ``index``.

    ``derive(s, r)`` is a pure function, so ``derive(derive(s, r), k)`` can be
    recomputed anywhere without sharing generator state.
    """
    if not index:
        raise ValueError("derive needs at least one index")
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(i) for i in index))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))
