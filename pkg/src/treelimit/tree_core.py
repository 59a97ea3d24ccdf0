"""Finite rooted trees, constant-time distance queries and exact oracles.

A :class:`RootedTree` is stored as flat arrays: ``parent`` (root is vertex 0
with parent -1), children in CSR form (``child_ptr``/``child_idx``, each
child list sorted by vertex index, which fixes the plane order) and
``depth``.  Generators emit this type; every distance computation in the
package goes through it.
"""

from __future__ import annotations

import csv
import json
from collections import deque
from functools import cached_property
from typing import Mapping

import numpy as np

from . import _kernels

Histogram = dict  # value -> probability


class TreeError(ValueError):
    """Raised for arrays that do not encode a single rooted tree."""


class RootedTree:
    """Immutable finite rooted ordered tree.

    Attributes
    ----------
    n : int
        Number of vertices.
    parent : int64[n]
        ``parent[0] == -1``; otherwise the parent vertex.
    child_ptr, child_idx : int64 arrays
        Children of ``v`` are ``child_idx[child_ptr[v]:child_ptr[v + 1]]``.
    depth : int64[n]
        Hop count from the root.
    bfs : int64[n]
        A vertex order in which every parent precedes its children
        (breadth-first, or simply ``0..n-1`` when labels already increase
        away from the root).
    """

    def __init__(self, parent, child_ptr, child_idx, depth, bfs):
        self.n = int(parent.shape[0])
        self.parent = parent
        self.child_ptr = child_ptr
        self.child_idx = child_idx
        self.depth = depth
        self.bfs = bfs
        for a in (parent, child_ptr, child_idx, depth, bfs):
            a.setflags(write=False)

    def __repr__(self) -> str:
        return f"RootedTree(n={self.n}, height={int(self.depth.max())})"

    def __eq__(self, other) -> bool:
        return isinstance(other, RootedTree) and np.array_equal(self.parent, other.parent)

    __hash__ = None

    @property
    def outdegree(self) -> np.ndarray:
        return np.diff(self.child_ptr)

    def children(self, v: int) -> np.ndarray:
        return self.child_idx[self.child_ptr[v] : self.child_ptr[v + 1]]

    @cached_property
    def preorder(self) -> np.ndarray:
        """Vertices in depth-first preorder (the canonical vertex order)."""
        return _kernels.preorder(self.n, self.child_ptr, self.child_idx)

    @cached_property
    def preorder_rank(self) -> np.ndarray:
        rank = np.empty(self.n, np.int64)
        rank[self.preorder] = np.arange(self.n)
        return rank

    @cached_property
    def subtree_size(self) -> np.ndarray:
        return _kernels.subtree_sizes(self.parent, self.bfs)

    @cached_property
    def lca_index(self) -> "LcaIndex":
        return LcaIndex(self)

    def pair_distances(self, us, vs) -> np.ndarray:
        """Hop distances ``d(us[i], vs[i])`` as an int64 array.

        Small batches on trees without a built index use an upward walk, which
        avoids the O(n log n) index build when only a few pairs are needed.
        """
        us = np.asarray(us, np.int64)
        vs = np.asarray(vs, np.int64)
        w = self.pair_lcas(us, vs)
        return self.depth[us] + self.depth[vs] - 2 * self.depth[w]

    def pair_lcas(self, us, vs) -> np.ndarray:
        """Lowest common ancestors of ``us[i]`` and ``vs[i]``."""
        us = np.asarray(us, np.int64)
        vs = np.asarray(vs, np.int64)
        if "lca_index" in self.__dict__ or us.size * 8 > self.n:
            return self.lca_index.lcas(us, vs)
        return _kernels.walk_lca_batch(self.parent, self.depth, us, vs)

    def to_json(self) -> str:
        parent = [int(p) for p in self.parent]
        return json.dumps({"n": self.n, "parent": parent}, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "RootedTree":
        rec = json.loads(text)
        tree = build_tree(rec["parent"])
        if tree.n != rec["n"]:
            raise TreeError(f"record says n={rec['n']} but parent array has {tree.n} entries")
        return tree


def _from_valid_parent(parent: np.ndarray) -> RootedTree:
    n = parent.shape[0]
    child_ptr, child_idx, monotone = _kernels.csr_children(parent)
    if monotone:
        depth = _kernels.monotone_depth(parent)
        bfs = np.arange(n, dtype=np.int64)
    else:
        bfs, depth, reached = _kernels.bfs_order(n, child_ptr, child_idx)
        if reached != n:
            raise TreeError(f"parent array contains a cycle ({n - reached} vertices unreachable from root)")
    return RootedTree(parent, child_ptr, child_idx, depth, bfs)


def build_tree(parents) -> RootedTree:
    """Validate a parent array and build the tree.

    ``parents[0]`` must be the root marker (-1 or ``None``); every other entry
    is the index of the parent vertex.
    """
    raw = list(parents) if not isinstance(parents, np.ndarray) else parents
    if len(raw) == 0:
        raise TreeError("a tree has at least one vertex")
    parent = np.array([-1 if p is None else p for p in raw], dtype=np.int64)
    n = parent.shape[0]
    roots = np.flatnonzero(parent < 0)
    if roots.size != 1:
        raise TreeError(f"expected exactly one root, found {roots.size}")
    if roots[0] != 0:
        raise TreeError("the root must be vertex 0")
    parent[0] = -1
    if n > 1 and parent[1:].max() >= n:
        raise TreeError("dangling parent index")
    if np.any(parent[1:] == np.arange(1, n)):
        raise TreeError("vertex is its own parent (cycle)")
    return _from_valid_parent(parent)


def validate_lukasiewicz(degrees) -> np.ndarray:
    d = np.asarray(degrees, dtype=np.int64)
    if d.ndim != 1 or d.size == 0:
        raise TreeError("degree sequence must be a nonempty 1-d array")
    if np.any(d < 0):
        raise TreeError("negative outdegree")
    walk = np.cumsum(d - 1)
    if walk[-1] != -1:
        raise TreeError(f"degrees sum to {int(d.sum())}, expected {d.size - 1}")
    if d.size > 1 and walk[:-1].min() < 0:
        raise TreeError("invalid preorder sequence: Lukasiewicz path hits -1 early")
    return d


def from_preorder_degrees(degrees) -> RootedTree:
    """Ordered tree whose preorder outdegree sequence is ``degrees``.

    Vertices are numbered in preorder.
    """
    d = validate_lukasiewicz(degrees)
    return _from_valid_parent(_kernels.decode_preorder(d))


def preorder_degrees(tree: RootedTree) -> np.ndarray:
    return tree.outdegree[tree.preorder]


class LcaIndex:
    """Euler tour with an argmin sparse table over tour depths.

    Build is O(n log n); each query is O(1).
    """

    def __init__(self, tree: RootedTree):
        self.tree = tree
        self.tour, self.first = _kernels.euler_tour(tree.n, tree.child_ptr, tree.child_idx, tree.depth)
        self.tour_depth = tree.depth[self.tour]
        self.table = _kernels.sparse_table(self.tour_depth)

    def lca(self, u: int, v: int) -> int:
        return int(self.lcas(np.array([u]), np.array([v]))[0])

    def lcas(self, us, vs) -> np.ndarray:
        us = np.asarray(us, np.int64)
        vs = np.asarray(vs, np.int64)
        return _kernels.lca_batch(self.table, self.tour, self.tour_depth, self.first, us, vs)

    def distances(self, us, vs) -> np.ndarray:
        us = np.asarray(us, np.int64)
        vs = np.asarray(vs, np.int64)
        depth = self.tree.depth
        return depth[us] + depth[vs] - 2 * depth[self.lcas(us, vs)]


def distance(index: LcaIndex, u: int, v: int) -> int:
    n = index.tree.n
    if not (0 <= u < n and 0 <= v < n):
        raise IndexError(f"vertex out of range for tree with {n} vertices")
    return int(index.distances(np.array([u]), np.array([v]))[0])


def rho_r(tree: RootedTree, vertices, scale: float = 1.0) -> np.ndarray:
    """Scaled distance matrix between the given vertices (zero diagonal)."""
    if scale <= 0:
        raise ValueError("scale must be positive")
    v = np.asarray(vertices, np.int64)
    r = v.size
    iu, ju = np.triu_indices(r, k=1)
    out = np.zeros((r, r))
    if iu.size:
        d = tree.pair_distances(v[iu], v[ju]) * float(scale)
        out[iu, ju] = d
        out[ju, iu] = d
    return out


def sample_vertices(tree: RootedTree, r: int, rng: np.random.Generator) -> np.ndarray:
    """``r`` i.i.d. uniform vertices, with replacement."""
    if r < 1:
        raise ValueError("r must be at least 1")
    return rng.integers(0, tree.n, size=r)


def exact_mean_distance(tree: RootedTree) -> float:
    """Mean of d(xi1, xi2) for independent uniform vertices, computed from edge cuts."""
    n = tree.n
    if n == 1:
        return 0.0
    s = tree.subtree_size[1:].astype(np.float64)
    return float(2.0 * np.sum(s * (n - s)) / (n * n))


def exact_distance_distribution(tree: RootedTree, max_n: int = 2000) -> Histogram:
    """Exact pmf of d(xi1, xi2) by breadth-first search from every vertex."""
    n = tree.n
    if n > max_n:
        raise ValueError(f"exact distribution is O(n^2); n={n} exceeds guard {max_n}")
    counts = _kernels.all_pairs_distance_counts(n, tree.child_ptr, tree.child_idx, tree.parent)
    total = float(n) * n
    return {int(d): float(c / total) for d, c in enumerate(counts) if c}


def bfs_distances(tree: RootedTree, source: int) -> np.ndarray:
    """Plain-Python breadth-first search; the reference for distance queries."""
    dist = [-1] * tree.n
    dist[source] = 0
    queue = deque([source])
    parent = tree.parent
    while queue:
        v = queue.popleft()
        nbrs = list(tree.children(v))
        if parent[v] >= 0:
            nbrs.append(parent[v])
        for w in nbrs:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
    return np.array(dist, dtype=np.int64)


def distances_from(tree: RootedTree, source: int) -> np.ndarray:
    return _kernels.bfs_from(source, tree.child_ptr, tree.child_idx, tree.parent)


def naive_lca(tree: RootedTree, u: int, v: int) -> int:
    ancestors = set()
    while u >= 0:
        ancestors.add(u)
        u = tree.parent[u]
    while v not in ancestors:
        v = tree.parent[v]
    return int(v)


def max_outdegree_vertex(tree: RootedTree) -> tuple[int, int]:
    """Vertex of maximum outdegree; ties go to the earliest vertex in preorder."""
    deg = tree.outdegree
    delta = int(deg.max())
    candidates = np.flatnonzero(deg == delta)
    v = candidates[np.argmin(tree.preorder_rank[candidates])]
    return int(v), delta


# ---------------------------------------------------------------------------
# distance-matrix checks
# ---------------------------------------------------------------------------


def four_point_violation(m: np.ndarray) -> float:
    """Largest four-point defect over all quadruples of distinct indices.

    For each quadruple the two largest of the three pairing sums must agree;
    the return value is the worst gap (0 for a tree metric).
    """
    r = m.shape[0]
    if r < 4:
        return 0.0
    worst = 0.0
    from itertools import combinations

    for i, j, k, l in combinations(range(r), 4):
        s = sorted((m[i, j] + m[k, l], m[i, k] + m[j, l], m[i, l] + m[j, k]))
        worst = max(worst, s[2] - s[1])
    return worst


def check_distance_matrix(m: np.ndarray, atol: float = 1e-9) -> None:
    """Raise ``AssertionError`` unless ``m`` is a tree-realizable distance matrix."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise AssertionError("distance matrix must be square")
    if np.any(np.diag(m) != 0):
        raise AssertionError("nonzero diagonal")
    if not np.allclose(m, m.T, atol=atol, rtol=0):
        raise AssertionError("not symmetric")
    if np.any(m < -atol):
        raise AssertionError("negative entry")
    r = m.shape[0]
    if r >= 3:
        tri = m[:, :, None] + m[None, :, :] - m[:, None, :]
        # tri[i, j, k] = m[i, j] + m[j, k] - m[i, k] must be >= 0
        if tri.min() < -atol * max(1.0, float(m.max())):
            raise AssertionError("triangle inequality fails")
    gap = four_point_violation(m)
    if gap > atol * max(1.0, float(m.max())):
        raise AssertionError(f"four-point condition fails (gap {gap})")


# ---------------------------------------------------------------------------
# histograms
# ---------------------------------------------------------------------------


def histogram(values) -> Histogram:
    vals, counts = np.unique(np.asarray(values), return_counts=True)
    total = counts.sum()
    return {v.item(): float(c / total) for v, c in zip(vals, counts)}


def histogram_mean(h: Mapping) -> float:
    return float(sum(k * p for k, p in h.items()))


def write_histogram_csv(h: Mapping, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["value", "probability"])
        for k in sorted(h):
            w.writerow([k, repr(float(h[k]))])


def read_histogram_csv(path) -> Histogram:
    out = {}
    with open(path, newline="") as fh:
        rows = csv.reader(fh)
        header = next(rows)
        if header != ["value", "probability"]:
            raise ValueError(f"unexpected histogram header {header}")
        for value, prob in rows:
            v = float(value)
            out[int(v) if v.is_integer() else v] = float(prob)
    return out
