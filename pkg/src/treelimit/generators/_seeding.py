import numpy as np


def numba_seed(rng: np.random.Generator) -> int:
    """Seed for numba's internal generator, drawn from ``rng``."""
    return int(rng.integers(0, 2**32 - 1))
