"""Devroye split trees and the permutation binary search tree."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from ..tree_core import RootedTree, build_tree
from ._seeding import numba_seed


@dataclass(frozen=True)
class SplitSpec:
    """Split-tree parameters.

    ``splitter`` is ``("dirichlet", alphas)`` or ``("fixed", vector)``.  The
    uniform spacings splitter ``(U, 1-U)`` is ``dirichlet`` with ``(1, 1)``.
    """

    b: int = 2
    s: int = 1
    s0: int = 1
    s1: int = 0
    splitter: tuple = ("dirichlet", (1.0, 1.0))

    def __post_init__(self):
        kind, params = self.splitter
        params = tuple(float(x) for x in params)
        object.__setattr__(self, "splitter", (kind, params))
        if self.b < 2:
            raise ValueError("branch factor b must be at least 2")
        if self.s < 1 or not 0 <= self.s0 <= self.s or self.s1 < 0:
            raise ValueError("need s >= 1, 0 <= s0 <= s, s1 >= 0")
        if self.b * self.s1 > self.s + 1 - self.s0:
            raise ValueError("b * s1 balls cannot exceed the s + 1 - s0 balls leaving an overflowing vertex")
        if len(params) != self.b:
            raise ValueError(f"splitter has {len(params)} components, expected b={self.b}")
        if kind == "dirichlet":
            if min(params) <= 0:
                raise ValueError("dirichlet parameters must be positive")
        elif kind == "fixed":
            if min(params) < 0 or abs(sum(params) - 1) > 1e-12:
                raise ValueError("fixed split vector must be a probability vector")
        else:
            raise ValueError(f"unknown splitter {kind!r}")

    @classmethod
    def bst(cls) -> "SplitSpec":
        return cls(2, 1, 1, 0, ("dirichlet", (1.0, 1.0)))

    @classmethod
    def dirichlet(cls, alphas, s: int = 1, s0: int = 1) -> "SplitSpec":
        alphas = tuple(alphas)
        return cls(len(alphas), s, s0, 0, ("dirichlet", alphas))

    @property
    def is_trivial(self) -> bool:
        """True when some V_i = 1 almost surely, so the tree never terminates."""
        kind, params = self.splitter
        return kind == "fixed" and max(params) == 1.0

    def sample_vectors(self, rng: np.random.Generator, size: int) -> np.ndarray:
        kind, params = self.splitter
        if kind == "dirichlet":
            return rng.dirichlet(params, size)
        return np.tile(np.array(params), (size, 1))

    def to_dict(self) -> dict:
        kind, params = self.splitter
        return {"b": self.b, "s": self.s, "s0": self.s0, "s1": self.s1, "splitter": {"kind": kind, "params": list(params)}}

    @classmethod
    def from_dict(cls, d: dict) -> "SplitSpec":
        sp = d.get("splitter", {"kind": "dirichlet", "params": [1.0] * d.get("b", 2)})
        return cls(d.get("b", 2), d.get("s", 1), d.get("s0", 1), d.get("s1", 0), (sp["kind"], tuple(sp["params"])))


@dataclass(frozen=True)
class SplitTree:
    tree: RootedTree
    balls: np.ndarray = field(repr=False)
    slot: np.ndarray = field(repr=False)


def sample_split_tree(
    spec: SplitSpec, n_balls: int, rng: np.random.Generator, method: str = "counts"
) -> SplitTree:
    """Split tree holding ``n_balls`` balls.

    With ``method="sequential"`` the balls are inserted one at a time from the root.

    A vertex keeps its first ``s`` balls.  When ball ``s + 1`` arrives it draws
    its own split vector, keeps ``s0`` balls for good, sends ``s1`` balls to
    every child and routes the rest by the split vector; later balls are
    routed straight through.  The tree is the set of visited vertices.

    The default ``method="counts"`` samples the same tree top-down: routed
    balls pick children independently, so a vertex that receives ``m > s``
    balls passes ``s1`` plus a multinomial share of ``m - s0 - b*s1`` to each
    child.  This touches every vertex once and numbers vertices
    breadth-first.
    """
    if spec.is_trivial:
        raise ValueError("trivial split vector (some V_i = 1 a.s.): the tree would be infinite")
    if n_balls < 1:
        raise ValueError("need at least one ball")
    if spec.s1:
        warnings.warn("split trees with s1 > 0 are experimental", stacklevel=2)
    kind, params = spec.splitter
    if method not in ("counts", "sequential"):
        raise ValueError(f"unknown method {method!r}")
    kernel = _kernels.split_tree_counts if method == "counts" else _kernels.split_tree
    parent, slot, balls, nv = kernel(
        n_balls, spec.b, spec.s, spec.s0, spec.s1, 0 if kind == "dirichlet" else 1, np.array(params), numba_seed(rng)
    )
    tree = build_tree(parent[:nv])
    return SplitTree(tree, balls[:nv].copy(), slot[:nv].copy())


def sample_bst(n: int, rng: np.random.Generator, method: str = "cartesian") -> RootedTree:
    """Binary search tree of a uniform random permutation of ``n`` keys.

    ``method="cartesian"`` builds it in O(n) as the Cartesian tree of the keys
    with insertion times as priorities; ``method="insert"`` inserts the keys
    one by one.  Vertices are labelled by insertion time in both cases, but
    only the insertion method keeps left/right children in key order.
    """
    if method == "cartesian":
        parent = _kernels.cartesian_bst(n, numba_seed(rng))
    elif method == "insert":
        parent, _ = _kernels.permutation_bst(n, numba_seed(rng))
    else:
        raise ValueError(f"unknown method {method!r}")
    return build_tree(parent)
