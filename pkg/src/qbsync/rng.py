"""Deterministic random streams.

Every random draw in the simulator comes from a generator derived from one
integer seed plus a counter path, so adding a consumer never perturbs the
draws of another.
"""

from __future__ import annotations

import numpy as np

# stream tags (first element of the spawn key after the trial index)
LISTS = 1
STRATEGY = 2
QUDIT = 3
OFFSETS = 4
EFFICIENCY = 5


def derive_rng(seed: int, *path: int) -> np.random.Generator:
    """Generator for ``seed`` split along the integer counter ``path``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(p) for p in path)))
