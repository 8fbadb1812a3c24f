"""Deterministic random substreams.

Every stochastic event in a run owns a generator derived from the run seed
and a structural key (namespace, round, population, index). Results are then
bit-reproducible and independent of batch size, thread count, and evaluation
order: parallelism changes only who computes a draw, never its value.
"""

import numpy as np

NS_DRAW = 0  # candidate-draw streams
NS_EM = 1  # mixture-fit initialization streams


def substream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the substream identified by `key` under the run seed."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))
