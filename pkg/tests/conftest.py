import numpy as np
import pytest

from treelimit import build_tree


def random_parent_tree(n, rng, shuffle=True):
    """Uniform-attachment tree with labels optionally permuted (parents need not precede children)."""
    parent = np.full(n, -1)
    for v in range(1, n):
        parent[v] = rng.integers(0, v)
    if not shuffle or n < 3:
        return build_tree(parent)
    perm = np.concatenate([[0], 1 + rng.permutation(n - 1)])  # perm[old] = new, root stays 0
    new = np.full(n, -1)
    new[perm[1:]] = perm[parent[1:]]
    return build_tree(new)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
