"""Seeded random streams.

Every consumer of randomness asks for a stream by ``(seed, purpose)`` so
that adding a diagnostic draw never shifts the optimizer's directions.
"""
import numpy as np

BANK = 1
START = 2
RIP = 3
PROFILE = 4
SYNTHETIC = 5


def stream(seed, purpose, *extra):
    """Return a fresh PCG64 generator keyed on ``(seed, purpose, *extra)``."""
    key = [int(seed) & 0xFFFFFFFFFFFFFFFF, int(purpose), *(int(e) for e in extra)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))
