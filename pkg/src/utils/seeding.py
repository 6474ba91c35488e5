"""
Derived random streams
"""
import numpy as np


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    """
    Independent generator for (seed, key...).

    The same (seed, key) always yields the same stream, regardless of how many
    other streams were drawn before it, so per-scene work can run in any order.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key)))
