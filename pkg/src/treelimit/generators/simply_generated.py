"""Exact sampler for simply generated trees with arbitrary weights.

The tree probability is proportional to prod_v w[outdeg(v)].  Weights such as
k! overflow double precision around n = 170, so everything runs on log
weights and partition values are combined with log-sum-exp.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln, logsumexp

from ..tree_core import RootedTree, build_tree

MAX_N = 500


def factorial_log_weights(n: int, alpha: float = 1.0) -> np.ndarray:
    """log of w_k = (k!)^alpha for k = 0..n-1."""
    return alpha * gammaln(np.arange(n) + 1.0)


class SimplyGeneratedSampler:
    """Partition tables for one weight sequence and maximum size.

    ``log_z[m]`` is the log total weight of trees with m vertices and
    ``log_forest[k][s]`` the log total weight of ordered k-tuples of trees with
    s vertices in total.  Tables are built once and then only read.
    """

    def __init__(self, n: int, weights=None, log_weights=None):
        if n < 1:
            raise ValueError("n must be positive")
        if n > MAX_N:
            raise ValueError(f"exact sampler is O(n^3); n={n} exceeds guard {MAX_N}")
        if (weights is None) == (log_weights is None):
            raise ValueError("pass exactly one of weights / log_weights")
        if log_weights is None:
            w = np.asarray(weights, dtype=np.float64)
            if np.any(w < 0):
                raise ValueError("weights must be nonnegative")
            with np.errstate(divide="ignore"):
                log_weights = np.log(w)
        lw = np.full(n, -np.inf)
        given = np.asarray(log_weights, dtype=np.float64)[:n]
        lw[: given.size] = given
        if lw[0] == -np.inf:
            raise ValueError("w_0 must be positive")
        if n > 1 and np.all(lw[1:] == -np.inf):
            raise ValueError("need some w_k > 0 with k >= 1")
        self.n = n
        self.log_w = lw

        # log_z[m], m = 0..n (log_z[0] = -inf: no empty trees)
        log_z = np.full(n + 1, -np.inf)
        # forest[k] over total sizes 0..n-1
        forest = np.full((n, n), -np.inf)
        forest[0, 0] = 0.0
        log_z[1] = lw[0]
        zrow = np.full(n, -np.inf)  # zrow[s] = log_z[s] for s < n
        zrow[1] = log_z[1]
        for m in range(2, n + 1):
            # forests of total size m - 2 just became complete once log_z[m-1] is known
            s = m - 1
            for k in range(1, s + 1):
                terms = zrow[1 : s + 1] + forest[k - 1, s - 1 :: -1][: s]
                forest[k, s] = logsumexp(terms)
            log_z[m] = logsumexp(lw[1:m] + forest[1:m, m - 1])
            if m < n:
                zrow[m] = log_z[m]
        self.log_z = log_z
        self.log_forest = forest
        if log_z[n] == -np.inf:
            raise ValueError(f"no tree of size {n} has positive weight")

    def sample(self, rng: np.random.Generator, n: int | None = None) -> RootedTree:
        n = self.n if n is None else n
        parent = [-1]
        # stack of (vertex id, subtree size)
        stack = [(0, n)]
        while stack:
            v, m = stack.pop()
            if m == 1:
                continue
            s = m - 1
            logits = self.log_w[1:m] + self.log_forest[1:m, s]
            k = 1 + _draw(logits, rng)
            sizes = []
            remaining = s
            for j in range(k, 0, -1):
                # first child size t, rest is a (j-1)-forest of size remaining - t
                if j == 1:
                    sizes.append(remaining)
                    break
                t = np.arange(1, remaining - (j - 1) + 1)
                logits = self.log_z[t] + self.log_forest[j - 1, remaining - t]
                size = int(t[_draw(logits, rng)])
                sizes.append(size)
                remaining -= size
            for size in sizes:
                c = len(parent)
                parent.append(v)
                stack.append((c, size))
        return build_tree(parent)


def _draw(logits: np.ndarray, rng: np.random.Generator) -> int:
    """Index drawn with probability proportional to exp(logits)."""
    cdf = np.cumsum(np.exp(logits - logits.max()))
    return min(int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right")), cdf.size - 1)


def sample_simply_generated_exact(n: int, rng: np.random.Generator, weights=None, log_weights=None) -> RootedTree:
    return SimplyGeneratedSampler(n, weights=weights, log_weights=log_weights).sample(rng)
