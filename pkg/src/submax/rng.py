"""Reproducible random streams.

Everything randomized in this package draws from a counter-based Philox
generator. Substreams are derived from a 64-bit master seed plus an integer
path (e.g. ``(iteration, sample_index)``), so a batch of samples can be
evaluated in any order, or concurrently, and still reproduce bit-for-bit.
"""

import numpy as np

# Fixed path prefixes so different phases of a run never collide.
STREAM_STEP = 0
STREAM_ROUND = 1
STREAM_TRACE = 2
STREAM_EVAL = 3


def master_stream(seed):
    """Top-level generator for a 64-bit seed."""
    return substream(seed)


def substream(seed, *path):
    """Philox generator for ``(seed, path...)``; independent across paths."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def kernel_seed(rng):
    """Draw a nonzero 64-bit seed to hand into a compiled kernel."""
    return np.uint64(rng.integers(1, np.iinfo(np.int64).max, dtype=np.int64))
