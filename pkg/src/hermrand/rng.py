"""Counter-based random streams keyed by (seed, stream, block).

Samples are generated in fixed-size blocks.  Block ``b`` of stream ``s``
always comes from a Philox generator keyed by ``SeedSequence(seed,
spawn_key=(s, b))``, so any partition of the blocks over workers reproduces
the same numbers bit for bit.
"""

import numpy as np

BLOCK_SIZE = 512


def block_rng(seed, stream=0, block=0):
    """Generator for one block of one stream."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream), int(block)))
    return np.random.Generator(np.random.Philox(ss))


def seed_rng(seed):
    """Generator for single draws keyed by the seed alone."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def block_ranges(n_samples, block_size=BLOCK_SIZE):
    """Yield ``(block_index, start, stop)`` covering ``range(n_samples)``."""
    for b, start in enumerate(range(0, n_samples, block_size)):
        yield b, start, min(start + block_size, n_samples)


def stream_key(*parts):
    """Stable integer stream id from small nonnegative integers (e.g. level, sweep index)."""
    key = 0
    for part in parts:
        key = key * 1_000_003 + int(part) + 1
    return key
