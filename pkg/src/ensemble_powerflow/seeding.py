"""Reproducible random substreams.

Every consumer of randomness derives its own generator from the run seed and
a fixed key, so draws do not depend on call order or worker count.
"""

import numpy as np

# Stream keys
SAMPLES = 0
SPLIT = 1
BOOTSTRAP = 2


def substream(seed: int, *key: int) -> np.random.Generator:
    """Return an independent generator for ``(seed, key...)``"""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    return np.random.default_rng(sequence)
