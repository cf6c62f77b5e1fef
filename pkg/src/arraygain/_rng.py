"""Counter-based random substreams.

Every random quantity in a simulation is drawn from a generator keyed by
(master seed, *counters), so results do not depend on evaluation order or
on how work is split across threads.
"""
import numpy as np


def substream(seed, *key):
    """Independent Philox generator for ``(seed, key...)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def complex_normal(rng, size):
    """Standard circularly-symmetric complex Gaussian draws, CN(0, 1).

    Real and imaginary parts are interleaved in a single draw so that a
    shorter request is always a prefix of a longer one.
    """
    size = (size,) if np.isscalar(size) else tuple(size)
    z = rng.standard_normal(size + (2,))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)
