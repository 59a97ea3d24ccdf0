"""Distances between empirical laws: KS, total variation and energy distance."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from scipy.spatial.distance import cdist

from ..tree_core import check_distance_matrix, rho_r, sample_vertices


def _ecdf(sorted_sample: np.ndarray, x: np.ndarray, side: str = "right") -> np.ndarray:
    return np.searchsorted(sorted_sample, x, side=side) / sorted_sample.size


def ks_statistic(samples_a, samples_b_or_cdf) -> float:
    """Kolmogorov-Smirnov distance, safe for samples with ties.

    Parameters
    ----------
    samples_a : array_like
        Nonempty sample.
    samples_b_or_cdf : array_like or callable
        A second sample (two-sample statistic) or a CDF ``F`` evaluated
        elementwise on arrays (one-sample statistic).

    Notes
    -----
    Both step CDFs are right-continuous and only change at sample points, so
    the supremum is attained at a jump point either at the point itself or
    just to its left.  The two-sample version compares both right-continuous
    CDFs at the pooled jump points.  The one-sample version also compares the
    left limits, with ``F(x-)`` read as ``F`` at the next float below ``x``,
    which makes it exact for lattice laws as well as continuous ones.
    """
    a = np.sort(np.asarray(samples_a, dtype=float))
    if a.size == 0:
        raise ValueError("samples_a is empty")
    if callable(samples_b_or_cdf):
        cdf: Callable = samples_b_or_cdf
        x = np.unique(a)
        right = np.abs(_ecdf(a, x) - cdf(x))
        left = np.abs(_ecdf(a, x, side="left") - cdf(np.nextafter(x, -np.inf)))
        return float(max(right.max(), left.max()))
    b = np.sort(np.asarray(samples_b_or_cdf, dtype=float))
    if b.size == 0:
        raise ValueError("samples_b is empty")
    x = np.union1d(a, b)
    return float(np.abs(_ecdf(a, x) - _ecdf(b, x)).max())


def ks_null_quantile(n_a: int, n_b: int | None = None, level: float = 0.95) -> float:
    """Asymptotic upper ``level`` quantile of the KS statistic under the null."""
    from scipy.special import kolmogi

    n_eff = n_a if n_b is None else n_a * n_b / (n_a + n_b)
    return float(kolmogi(1.0 - level) / np.sqrt(n_eff))


def total_variation_discrete(hist_a: Mapping, hist_b: Mapping) -> float:
    """Half the l1 distance between two pmfs given as ``{value: mass}``."""
    keys = set(hist_a) | set(hist_b)
    return 0.5 * float(sum(abs(hist_a.get(k, 0.0) - hist_b.get(k, 0.0)) for k in keys))


@dataclass
class EmpiricalTau:
    """Bag of ``m`` sampled ``r x r`` distance matrices (an empirical tau_r).

    Attributes
    ----------
    r : int
        Matrix order.
    draws : ndarray, shape (m, r, r)
    """

    r: int
    draws: np.ndarray

    def __post_init__(self):
        self.draws = np.asarray(self.draws, dtype=float)
        if self.draws.ndim != 3 or self.draws.shape[1:] != (self.r, self.r):
            raise ValueError(f"draws must have shape (m, {self.r}, {self.r})")
        if self.draws.shape[0] < 1:
            raise ValueError("need at least one draw")

    @property
    def m(self) -> int:
        return self.draws.shape[0]

    def upper(self) -> np.ndarray:
        """Upper-triangle entries of each draw, shape ``(m, r(r-1)/2)``."""
        iu, ju = np.triu_indices(self.r, k=1)
        return self.draws[:, iu, ju]

    def validate(self, atol: float = 1e-9) -> None:
        for d in self.draws:
            check_distance_matrix(d, atol)

    @classmethod
    def from_trees(cls, source, n: int, r: int, m: int, scale: float, rng: np.random.Generator) -> "EmpiricalTau":
        """One fresh tree per draw, ``r`` uniform vertices, distances times ``scale``."""
        draws = np.empty((m, r, r))
        for i, child in enumerate(rng.spawn(m)):
            tree = source(n, child)
            draws[i] = rho_r(tree, sample_vertices(tree, r, child), scale)
        return cls(r, draws)

    @classmethod
    def from_dendron(cls, dendron, r: int, m: int, rng: np.random.Generator) -> "EmpiricalTau":
        from ..dendrons import rho_r_dendron

        return cls(r, np.stack([rho_r_dendron(dendron, r, rng) for _ in range(m)]))

    def to_json(self) -> str:
        return json.dumps({"r": self.r, "draws": self.draws.tolist()}, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "EmpiricalTau":
        try:
            rec = json.loads(text)
            tau = cls(int(rec["r"]), np.asarray(rec["draws"], dtype=float))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed EmpiricalTau record: {exc}") from exc
        tau.validate()
        return tau

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "EmpiricalTau":
        with open(path) as fh:
            return cls.from_json(fh.read())


def energy_distance_tau(a: EmpiricalTau, b: EmpiricalTau) -> float:
    """Energy distance ``2 E|X-Y| - E|X-X'| - E|Y-Y'|`` between two bags.

    Matrices are compared through their upper-triangle entries with the
    Euclidean norm, so every pair ``i < j`` counts once.  Expectations are
    plain averages over all pairs of draws (V-statistics), which keeps the
    value at exactly 0 for identical bags.
    """
    if a.r != b.r:
        raise ValueError(f"order mismatch: r={a.r} vs r={b.r}")
    if a.r < 2:
        return 0.0
    x, y = a.upper(), b.upper()
    exy = cdist(x, y).mean()
    exx = cdist(x, x).mean()
    eyy = cdist(y, y).mean()
    return float(max(0.0, 2 * exy - exx - eyy))
