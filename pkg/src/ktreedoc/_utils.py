import numpy as np


def check_rng(random_state=None):
    """Turn ``None``/int/Generator into a ``numpy.random.Generator`` (PCG64).

    All randomness in the package flows through PCG64 so that a seed printed
    by the CLI reproduces a run exactly.
    """
    if isinstance(random_state, np.random.Generator):
        return random_state
    if random_state is None or isinstance(random_state, (int, np.integer)):
        return np.random.default_rng(random_state)
    raise TypeError("random_state must be None, an int or a numpy Generator")


def child_rng(rng):
    """Derive an independent generator from ``rng`` (consumes one draw)."""
    return np.random.default_rng(int(rng.integers(0, 2**63 - 1)))


class DistanceTally:
    """Mutable counter of point-to-point distance evaluations."""

    def __init__(self):
        self.count = 0

    def add(self, n):
        self.count += int(n)

    def __repr__(self):
        return "DistanceTally(count=%d)" % self.count
