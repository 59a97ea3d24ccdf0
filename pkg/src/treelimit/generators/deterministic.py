"""Paths, stars, complete b-ary trees and superstars."""

import numpy as np

from ..tree_core import RootedTree, build_tree


def path(n: int) -> RootedTree:
    """Path on ``n`` vertices rooted at one end."""
    return build_tree(np.arange(-1, n - 1))


def star(n: int) -> RootedTree:
    """Star with ``n`` vertices rooted at the center."""
    parent = np.zeros(n, np.int64)
    parent[0] = -1
    return build_tree(parent)


def complete_bary(b: int, h: int) -> RootedTree:
    """Complete b-ary tree of height ``h`` (``(b**(h+1) - 1) / (b - 1)`` vertices)."""
    if b < 2 or h < 0:
        raise ValueError("need b >= 2 and h >= 0")
    n = (b ** (h + 1) - 1) // (b - 1)
    parent = (np.arange(n) - 1) // b
    parent[0] = -1
    return build_tree(parent)


def superstar(profile) -> RootedTree:
    """Center with ``profile[k]`` pendant paths of k edges.

    ``profile`` maps arm length k >= 1 to a count; a sequence is read as
    ``(N_1, N_2, ...)``.
    """
    if not isinstance(profile, dict):
        profile = {k + 1: c for k, c in enumerate(profile)}
    if any(k < 1 or c < 0 for k, c in profile.items()):
        raise ValueError("arm lengths must be >= 1 and counts nonnegative")
    parent = [-1]
    for k in sorted(profile):
        for _ in range(int(profile[k])):
            prev = 0
            for _ in range(k):
                parent.append(prev)
                prev = len(parent) - 1
    return build_tree(np.array(parent, np.int64))
