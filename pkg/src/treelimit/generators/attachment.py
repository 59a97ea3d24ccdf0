"""Linear preferential attachment trees (rate chi * outdeg + rho)."""

from __future__ import annotations

import math

import numpy as np

from .. import _kernels
from ..tree_core import RootedTree, build_tree
from ._seeding import numba_seed


def _check_rates(chi: float, rho: float) -> None:
    if rho <= 0:
        raise ValueError("rho must be positive (a fresh vertex needs a positive rate)")
    if chi < 0:
        cap = rho / -chi
        if abs(cap - round(cap)) > 1e-9:
            raise ValueError(
                f"rate chi*k + rho turns negative at k = {math.ceil(cap)} for chi={chi}, rho={rho}"
            )


def sample_preferential_attachment(
    chi: float, rho: float, n: int, rng: np.random.Generator, method: str = "direct"
) -> RootedTree:
    """Grow a tree to ``n`` vertices; each new vertex picks its parent with
    probability proportional to ``chi * outdeg + rho``.

    With ``chi >= 0`` a step picks the parent of a uniform earlier vertex
    (mass ``chi`` per child) or a uniform vertex (mass ``rho``); with
    ``chi < 0`` the rate is proportional to the number of free child slots,
    so a uniform free slot is drawn.  Both cost O(1) per vertex.
    ``method="fenwick"`` keeps all rates in a binary indexed tree instead
    (O(log n) per step); it samples the same law and serves as a cross-check.
    """
    _check_rates(chi, rho)
    if n < 1:
        raise ValueError("n must be positive")
    seed = numba_seed(rng)
    if method == "fenwick":
        parent = _kernels.linear_attachment(n, float(chi), float(rho), seed)
    elif method != "direct":
        raise ValueError(f"unknown method {method!r}")
    elif chi >= 0:
        parent = _kernels.urn_attachment(n, float(chi), float(rho), seed)
    else:
        parent = _kernels.slot_attachment(n, int(round(rho / -chi)), seed)
    if parent[0] == -2:
        raise ArithmeticError("negative attachment rate reached")
    return build_tree(parent)


def rrt(n, rng):
    """Random recursive tree."""
    return sample_preferential_attachment(0.0, 1.0, n, rng)


def port(n, rng):
    """Plane-oriented recursive tree."""
    return sample_preferential_attachment(1.0, 1.0, n, rng)


def bst(n, rng):
    return sample_preferential_attachment(-1.0, 2.0, n, rng)


def bary(b, n, rng):
    """b-ary increasing tree."""
    return sample_preferential_attachment(-1.0, float(b), n, rng)
