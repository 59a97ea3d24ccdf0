"""Monte Carlo convergence diagnostics for random tree families."""

from __future__ import annotations

import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import linregress

from ..tree_core import Histogram, RootedTree, histogram, max_outdegree_vertex

Source = Callable[[int, np.random.Generator], RootedTree]

DEFAULT_LEVELS = (0.05, 0.25, 0.5, 0.75, 0.95, 0.99)


@dataclass(frozen=True)
class Scaling:
    """Scaling rule ``c_n``: ``none``, ``1/log n``, ``1/sqrt n``, ``1/n`` or a constant."""

    name: str
    c: float = 1.0

    @classmethod
    def parse(cls, text) -> "Scaling":
        if isinstance(text, Scaling):
            return text
        t = re.sub(r"\s+", "", str(text)).lower()
        aliases = {
            "none": "none", "1": "none",
            "1/logn": "1/log n", "1/ln(n)": "1/log n", "1/logn(n)": "1/log n", "log": "1/log n",
            "1/sqrtn": "1/sqrt n", "1/sqrt(n)": "1/sqrt n", "1/√n": "1/sqrt n", "sqrt": "1/sqrt n",
            "1/n": "1/n",
        }
        if t in aliases:
            return cls(aliases[t])
        try:
            c = float(t)
        except ValueError:
            raise ValueError(f"unknown scaling {text!r}; use none, 1/log n, 1/sqrt n, 1/n or a number") from None
        if not c > 0:
            raise ValueError("custom scaling constant must be positive")
        return cls("custom", c)

    def factor(self, n: int) -> float:
        if self.name == "none":
            return 1.0
        if self.name == "1/log n":
            return 1.0 / math.log(n)
        if self.name == "1/sqrt n":
            return 1.0 / math.sqrt(n)
        if self.name == "1/n":
            return 1.0 / n
        return self.c

    def __str__(self) -> str:
        return f"custom {self.c!r}" if self.name == "custom" else self.name


def replicate(fn, rng: np.random.Generator, count: int, threads: int = 1) -> list:
    """``[fn(child_rng) for each of count spawned generators]`` in a fixed order.

    Child generators are spawned from ``rng`` up front, so results do not
    depend on ``threads``.
    """
    children = rng.spawn(count)
    if threads <= 1:
        return [fn(c) for c in children]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, children))


def pairs_in_tree(tree: RootedTree, m_pairs: int, rng: np.random.Generator) -> np.ndarray:
    """Distances between ``m_pairs`` independent pairs of uniform vertices."""
    uv = rng.integers(0, tree.n, size=(2, m_pairs))
    return tree.pair_distances(uv[0], uv[1])


@dataclass
class DistanceSamples:
    """Scaled pair distances from ``m_trees`` trees with ``m_pairs`` pairs each."""

    n: int
    scale: float
    per_tree: np.ndarray  # shape (m_trees, m_pairs)

    @property
    def pooled(self) -> np.ndarray:
        return self.per_tree.ravel()

    def summary(self, levels: Sequence[float] = DEFAULT_LEVELS) -> dict:
        x = self.pooled
        tree_means = self.per_tree.mean(axis=1)
        se = tree_means.std(ddof=1) / math.sqrt(len(tree_means)) if len(tree_means) > 1 else x.std() / math.sqrt(x.size)
        return {
            "n": self.n,
            "scale": self.scale,
            "m_trees": int(self.per_tree.shape[0]),
            "m_pairs": int(self.per_tree.shape[1]),
            "mean": float(x.mean()),
            "stderr": float(se),
            "quantiles": {repr(q): float(v) for q, v in zip(levels, np.quantile(x, levels))},
            "tree_mean_spread": float(tree_means.std()),
        }


def scaled_distance_samples(source: Source, scaling, n: int, m_trees: int, m_pairs: int,
                            rng: np.random.Generator, threads: int = 1) -> DistanceSamples:
    """Pooled and per-tree samples of ``c_n d(xi1, xi2)``."""
    if m_trees < 1 or m_pairs < 1:
        raise ValueError("m_trees and m_pairs must be at least 1")
    c = Scaling.parse(scaling).factor(n)

    def one(child):
        return pairs_in_tree(source(n, child), m_pairs, child)

    per_tree = np.stack(replicate(one, rng, m_trees, threads)).astype(float) * c
    return DistanceSamples(n, c, per_tree)


@dataclass
class SlopeFit:
    slope: float
    intercept: float
    stderr: float
    n_grid: list
    means: list
    stderrs: list

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def check_grid(n_grid: Sequence[int], min_points: int = 2, min_ratio: float = 1.0) -> list:
    grid = [int(v) for v in n_grid]
    if len(grid) < min_points:
        raise ValueError(f"n grid needs at least {min_points} points")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("n grid must be strictly increasing")
    if grid[-1] / grid[0] < min_ratio:
        raise ValueError(f"n grid must span a factor of at least {min_ratio:g}")
    return grid


def fit_slope(n_grid, means, stderrs) -> SlopeFit:
    """Weighted least squares of ``means`` on ``log n`` with weights ``1/stderr**2``."""
    x = np.log(np.asarray(n_grid, float))
    y = np.asarray(means, float)
    se = np.asarray(stderrs, float)
    if np.all(se > 0):
        (slope, intercept), cov = np.polyfit(x, y, 1, w=1.0 / se, cov="unscaled")
        slope_se = math.sqrt(max(cov[0, 0], 0.0))
    else:
        # some means are exact (zero spread): fall back to ordinary least squares
        fit = linregress(x, y)
        slope, intercept, slope_se = fit.slope, fit.intercept, fit.stderr
    return SlopeFit(float(slope), float(intercept), float(slope_se),
                    [int(v) for v in n_grid], [float(v) for v in y], [float(v) for v in se])


def slope_vs_logn(source: Source, n_grid: Sequence[int], m_trees: int, m_pairs: int,
                  rng: np.random.Generator, threads: int = 1) -> tuple[SlopeFit, list]:
    """Fit mean ``d(xi1, xi2)`` against ``log n``; the slope estimates ``2a``.

    Standard errors of the per-n means come from the spread of per-tree
    means, so between-tree fluctuations are accounted for.  Returns the fit
    and the per-n :class:`DistanceSamples` (unscaled).
    """
    grid = check_grid(n_grid, min_points=3, min_ratio=100.0)
    samples = [scaled_distance_samples(source, "none", n, m_trees, m_pairs, rng, threads) for n in grid]
    stats = [s.summary() for s in samples]
    return fit_slope(grid, [s["mean"] for s in stats], [s["stderr"] for s in stats]), samples


def lca_depth_profile(source: Source, n: int, m_trees: int, m_pairs: int,
                      rng: np.random.Generator, threads: int = 1) -> Histogram:
    """Empirical pmf of the depth of the LCA of two uniform vertices."""

    def one(child):
        tree = source(n, child)
        uv = child.integers(0, tree.n, size=(2, m_pairs))
        return tree.depth[tree.pair_lcas(uv[0], uv[1])]

    return histogram(np.concatenate(replicate(one, rng, m_trees, threads)))


def tail_probabilities(h: Histogram) -> dict:
    """``{k: P(X >= k)}`` for a pmf on the nonnegative integers."""
    ks = sorted(h)
    out, acc = {}, 1.0
    for k in range(0, int(ks[-1]) + 1):
        out[k] = max(acc, 0.0)
        acc -= h.get(k, 0.0)
    return out


@dataclass
class TightnessReport:
    scaling: str
    levels: list
    rows: list
    envelope_slope: float
    slope_tol: float
    verdict: str

    @property
    def tight(self) -> bool:
        return self.verdict == "tight-consistent"

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def tightness_report(source: Source, scaling, n_grid: Sequence[int], quantile_levels: Sequence[float],
                     m_trees: int, m_pairs: int, rng: np.random.Generator, slope_tol: float = 0.05,
                     threads: int = 1) -> TightnessReport:
    """Upper quantiles of ``c_n d(xi1, xi2)`` across ``n``.

    The verdict is ``tight-consistent`` when the least-squares slope of
    ``log q`` against ``log n`` for the top quantile ``q`` is at most
    ``slope_tol``, i.e. the envelope does not grow like any power of ``n``
    within noise; otherwise ``not-tight``.
    """
    grid = check_grid(n_grid, min_points=2)
    levels = sorted(float(q) for q in quantile_levels)
    sc = Scaling.parse(scaling)
    rows = []
    for n in grid:
        s = scaled_distance_samples(source, sc, n, m_trees, m_pairs, rng, threads)
        qs = np.quantile(s.pooled, levels)
        rows.append({"n": n, "quantiles": {repr(q): float(v) for q, v in zip(levels, qs)}})
    top = np.array([r["quantiles"][repr(levels[-1])] for r in rows])
    floor = max(float(top.max()) * 1e-12, 1e-300)
    slope = float(np.polyfit(np.log(grid), np.log(np.maximum(top, floor)), 1)[0])
    verdict = "tight-consistent" if slope <= slope_tol else "not-tight"
    return TightnessReport(str(sc), levels, rows, slope, slope_tol, verdict)


@dataclass
class CondensationProfile:
    vstar: int
    max_degree: int
    pmf: Histogram
    additivity_failure: float
    samples: np.ndarray = field(repr=False)


def condensation_profile(tree: RootedTree, m: int, rng: np.random.Generator) -> CondensationProfile:
    """Distances from uniform vertices to the max-degree vertex ``v*``.

    ``m`` independent pairs are drawn; the pmf pools ``d(xi1, v*)`` and
    ``d(xi2, v*)`` and ``additivity_failure`` is the frequency of
    ``d(xi1, xi2) != d(xi1, v*) + d(xi2, v*)``.
    """
    vstar, delta = max_outdegree_vertex(tree)
    uv = rng.integers(0, tree.n, size=(2, m))
    target = np.full(m, vstar)
    d1 = tree.pair_distances(uv[0], target)
    d2 = tree.pair_distances(uv[1], target)
    d12 = tree.pair_distances(uv[0], uv[1])
    both = np.concatenate([d1, d2])
    return CondensationProfile(int(vstar), int(delta), histogram(both),
                               float(np.mean(d12 != d1 + d2)), both)


def geometric1_pmf(q: float, kmax: int) -> Histogram:
    """pmf ``q (1-q)**(k-1)`` of the geometric law on ``{1, 2, ...}``, up to ``kmax``."""
    return {k: q * (1 - q) ** (k - 1) for k in range(1, kmax + 1)}


def tv_to_geometric1(h: Histogram, q: float) -> float:
    """Total variation between a pmf and the geometric law on ``{1, 2, ...}``."""
    kmax = max(int(max(h)), 1)
    ref = geometric1_pmf(q, kmax)
    tail = (1 - q) ** kmax
    keys = set(h) | set(ref)
    return 0.5 * (sum(abs(h.get(k, 0.0) - ref.get(k, 0.0)) for k in keys) + tail)
