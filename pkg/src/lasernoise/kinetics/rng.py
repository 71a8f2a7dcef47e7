"""Counter-based random streams keyed by (master seed, trajectory index)."""
from __future__ import annotations

import numpy as np


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Philox generator for trajectory ``index`` of an ensemble seeded by ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))
