from typing import Union, Sequence

import numpy as np

Seed = Union[int, Sequence[int]]


def make_rng(seed: Seed) -> np.random.Generator:
    """
    Build the generator for one named stream of randomness.

    Compound seeds (e.g. ``[jitter_seed, frame_index]``) give independent
    streams per frame without consuming draws from a shared generator.
    """
    return np.random.default_rng(np.random.SeedSequence(seed))


def spawn_rng(seed: Seed, stream: int) -> np.random.Generator:
    """
    The generator of child `stream` of `seed`, independent of both
    ``make_rng(seed)`` and the other children.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream,)))
