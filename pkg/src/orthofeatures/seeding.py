"""Seed splitting.

Every random draw in the package comes from a generator derived from a single
root seed plus a tuple of non-negative integer keys::

    rng = child_rng(root_seed, key0, key1, ...)

which is ``numpy.random.default_rng(SeedSequence(root_seed, spawn_key=keys))``.
The keys act as a counter path, e.g. ``(STREAM_MC, z_index, chunk_index)``, so
any sub-computation can be reproduced on its own and work split across threads
draws exactly the same numbers as a sequential run.
"""

import numpy as np

# Stream identifiers, first component of the key path.
STREAM_MAP = 0
STREAM_MSE = 1
STREAM_MC = 2
STREAM_ORTHO = 3
STREAM_ANGLE = 4
STREAM_DATA = 5
STREAM_SIGMA = 6
STREAM_PAIRS = 7
STREAM_RECALL = 8

_MASK64 = (1 << 64) - 1


def _check_seed(seed):
    seed = int(seed)
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return seed & _MASK64


def child_sequence(seed, *keys):
    return np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(k) for k in keys))


def child_rng(seed, *keys):
    """Generator for the stream addressed by ``(seed, *keys)``."""
    return np.random.default_rng(child_sequence(seed, *keys))


def child_seed(seed, *keys):
    """A derived 64-bit integer seed, for APIs that take plain integers."""
    state = child_sequence(seed, *keys).generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1]) << 32)
