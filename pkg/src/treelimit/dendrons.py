"""Limit objects (long dendrons) as samplers.

A dendron draws i.i.d. points from its measure and evaluates the pseudo
distance between them, so its output is directly comparable with scaled
distance matrices of finite trees.  Three kinds are provided:

* :class:`PointDendron` -- one base point with heights drawn from a law
  ``nu`` on ``[0, inf)``; distinct indices ``i != j`` are at distance
  ``x_i + x_j``.
* :class:`IntervalDendron` -- the interval ``[0, L]`` with uniform measure.
* :class:`ExcursionDendron` -- the real tree coded by a grid function ``g``
  with ``d(s, t) = g(s) + g(t) - 2 min_[s, t] g``; with ``g = (2/sigma) e``
  for a Brownian excursion ``e`` this is the scaling limit of critical
  conditioned Galton-Watson trees.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels

DEFAULT_GRID = 2**16
NU_KINDS = ("dirac", "geometric1", "empirical")


class Dendron:
    """Common sampling interface; subclasses define points and distances."""

    kind = "abstract"

    def sample_points(self, r: int, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def distances(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Distances between points ``x[i]`` and ``y[i]`` carrying distinct indices."""
        raise NotImplementedError

    def distance_matrix(self, points: np.ndarray) -> np.ndarray:
        r = len(points)
        out = np.zeros((r, r))
        iu, ju = np.triu_indices(r, k=1)
        if iu.size:
            d = self.distances(points[iu], points[ju])
            out[iu, ju] = d
            out[ju, iu] = d
        return out

    def pair_distances(self, size: int, rng: np.random.Generator) -> np.ndarray:
        """``size`` independent copies of the distance between two random points."""
        pts = self.sample_points(2 * size, rng)
        return self.distances(pts[0::2], pts[1::2])

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class PointDendron(Dendron):
    """Single-point dendron with height law ``nu``.

    ``nu_kind`` is ``dirac`` (``a``), ``geometric1`` (``q``; pmf
    ``q (1-q)**(l-1)`` on ``l >= 1``) or ``empirical`` (``values``, drawn
    uniformly).
    """

    nu_kind: str
    params: dict = field(default_factory=dict)
    kind = "point"

    def __post_init__(self):
        p = self.params
        if self.nu_kind == "dirac":
            if not p.get("a", -1) >= 0:
                raise ValueError("dirac needs a >= 0")
        elif self.nu_kind == "geometric1":
            if not 0 < p.get("q", 0) <= 1:
                raise ValueError("geometric1 needs 0 < q <= 1")
        elif self.nu_kind == "empirical":
            vals = np.asarray(p.get("values", []), float)
            if vals.size == 0 or np.any(vals < 0):
                raise ValueError("empirical law needs nonnegative values")
        else:
            raise ValueError(f"unknown nu kind {self.nu_kind!r}; choose from {', '.join(NU_KINDS)}")

    @classmethod
    def dirac(cls, a: float) -> "PointDendron":
        return cls("dirac", {"a": float(a)})

    @classmethod
    def geometric1(cls, q: float) -> "PointDendron":
        return cls("geometric1", {"q": float(q)})

    @classmethod
    def empirical(cls, values) -> "PointDendron":
        return cls("empirical", {"values": [float(v) for v in values]})

    def sample_points(self, r, rng):
        p = self.params
        if self.nu_kind == "dirac":
            return np.full(r, p["a"])
        if self.nu_kind == "geometric1":
            return rng.geometric(p["q"], r).astype(float)
        return rng.choice(np.asarray(p["values"], float), r)

    def distances(self, x, y):
        return np.asarray(x, float) + np.asarray(y, float)

    def nu_pmf(self, support) -> np.ndarray:
        """pmf of ``nu`` on integer points (geometric and dirac laws)."""
        k = np.asarray(support)
        if self.nu_kind == "geometric1":
            q = self.params["q"]
            return np.where(k >= 1, q * (1 - q) ** (np.maximum(k, 1) - 1), 0.0)
        if self.nu_kind == "dirac":
            return (k == self.params["a"]).astype(float)
        vals = np.asarray(self.params["values"])
        return np.array([np.mean(vals == v) for v in k])

    def to_dict(self):
        return {"kind": "point", "nu": {"kind": self.nu_kind, **self.params}}


@dataclass(frozen=True)
class IntervalDendron(Dendron):
    """The interval ``[0, length]`` with normalized Lebesgue measure."""

    length: float = 1.0
    kind = "interval"

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("length must be positive")

    def sample_points(self, r, rng):
        return rng.random(r) * self.length

    def distances(self, x, y):
        return np.abs(np.asarray(x) - np.asarray(y))

    def to_dict(self):
        return {"kind": "interval", "length": self.length}


class ExcursionTree:
    """Real tree coded by a nonnegative grid function.

    Parameters
    ----------
    values : array_like
        ``g(k/m)`` for ``k = 0..m``, with ``g(0) = g(1) = 0`` and ``g >= 0``.
    """

    def __init__(self, values):
        g = np.array(values, dtype=np.float64)
        if g.ndim != 1 or g.size < 3:
            raise ValueError("need at least three grid values")
        if g[0] != 0 or g[-1] != 0:
            raise ValueError("excursion must vanish at both endpoints")
        if g.min() < 0:
            raise ValueError("excursion must be nonnegative")
        g.setflags(write=False)
        self.values = g
        self.m = g.size - 1

    @cached_property
    def _table(self) -> np.ndarray:
        return _kernels.sparse_table(self.values)

    def snap(self, t) -> np.ndarray:
        """Nearest grid index of times in ``[0, 1]``."""
        return np.rint(np.clip(np.asarray(t, float), 0.0, 1.0) * self.m).astype(np.int64)

    def index_distances(self, s_idx, t_idx) -> np.ndarray:
        s_idx = np.asarray(s_idx, np.int64)
        t_idx = np.asarray(t_idx, np.int64)
        if s_idx.size <= 4 and "_table" not in self.__dict__:
            g = self.values
            out = np.empty(s_idx.size)
            for i, (a, b) in enumerate(zip(s_idx, t_idx)):
                a, b = min(a, b), max(a, b)
                out[i] = g[a] + g[b] - 2.0 * g[a : b + 1].min()
            return out
        return _kernels.excursion_distances(self._table, self.values, s_idx, t_idx)

    def scaled(self, factor: float) -> "ExcursionTree":
        return ExcursionTree(self.values * float(factor))

    def write_csv(self, path) -> None:
        """Grid as ``t,g`` rows for plotting."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "g"])
            for k, v in enumerate(self.values):
                w.writerow([repr(k / self.m), repr(float(v))])

    @classmethod
    def read_csv(cls, path) -> "ExcursionTree":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        return cls([float(r["g"]) for r in rows])


def excursion_distance(tree: ExcursionTree, s: float, t: float) -> float:
    """``g(s) + g(t) - 2 min_[s, t] g`` with ``s`` and ``t`` snapped to the grid."""
    s_idx, t_idx = tree.snap([s, t])
    return float(tree.index_distances(np.array([s_idx]), np.array([t_idx]))[0])


class ExcursionDendron(Dendron):
    """Excursion tree with the measure induced by uniform time on the grid."""

    kind = "excursion"

    def __init__(self, tree: ExcursionTree, sigma: float | None = None):
        self.tree = tree
        self.sigma = sigma

    def sample_points(self, r, rng):
        # times 0 and 1 code the same point, so draw from k = 0..m-1
        return rng.integers(0, self.tree.m, size=r)

    def distances(self, x, y):
        return self.tree.index_distances(x, y)

    def to_dict(self):
        if self.sigma is not None:
            return {"kind": "crt", "sigma": self.sigma, "m": self.tree.m}
        return {"kind": "excursion", "m": self.tree.m}


# ---------------------------------------------------------------------------
# Brownian excursion
# ---------------------------------------------------------------------------


def sample_brownian_bridge(m: int, rng: np.random.Generator) -> np.ndarray:
    """Gaussian random-walk bridge ``b_0..b_m`` (unit increments, pinned at 0)."""
    if m < 2:
        raise ValueError("grid size m must be at least 2")
    walk = np.empty(m + 1)
    walk[0] = 0.0
    np.cumsum(rng.standard_normal(m), out=walk[1:])
    walk -= np.arange(m + 1) * (walk[-1] / m)
    walk[-1] = 0.0
    return walk


def vervaat(bridge: np.ndarray) -> tuple[np.ndarray, int]:
    """Cyclic shift of a bridge at its argmin, lifted to start at zero.

    Returns the excursion values (length ``m + 1``) and the shift ``k*`` so
    that excursion index ``j`` is bridge index ``(k* + j) mod m``.
    """
    m = bridge.size - 1
    k = int(np.argmin(bridge[:m]))
    exc = np.empty(m + 1)
    exc[:m] = np.roll(bridge[:m], -k) - bridge[k]
    exc[m] = 0.0
    np.maximum(exc, 0.0, out=exc)
    return exc, k


def sample_brownian_excursion(m: int, rng: np.random.Generator) -> ExcursionTree:
    """Standard Brownian excursion on the grid ``{k/m}``.

    A Gaussian walk bridge is turned into an excursion by the Vervaat
    transform and rescaled by ``1/sqrt(m)``.
    """
    exc, _ = vervaat(sample_brownian_bridge(m, rng))
    return ExcursionTree(exc / math.sqrt(m))


def crt_dendron(sigma: float, m: int = DEFAULT_GRID, rng: np.random.Generator | None = None,
                excursion: ExcursionTree | None = None) -> ExcursionDendron:
    """Brownian CRT coded by ``(2/sigma) e``.

    Pair distances emulate ``d(xi1, xi2)/sqrt(n)`` in a critical conditioned
    Galton-Watson tree whose offspring variance is ``sigma**2``.  Pass
    ``excursion`` to reuse a standard excursion draw instead of sampling one.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if excursion is None:
        if rng is None:
            raise ValueError("need rng or an excursion")
        excursion = sample_brownian_excursion(m, rng)
    return ExcursionDendron(excursion.scaled(2.0 / sigma), sigma=float(sigma))


def crt_pair_distances(sigma: float, m: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """One pair distance from each of ``size`` independent CRT draws."""
    out = np.empty(size)
    for i in range(size):
        out[i] = pair_distance(crt_dendron(sigma, m, rng), rng)
    return out


def refinement_pair_samples(m: int, n_excursions: int, pairs: int, rng: np.random.Generator):
    """Coupled pair distances on the grids ``m`` and ``m/2``.

    The coarse bridge is the fine bridge read at even indices, which is
    exactly a Gaussian walk bridge on ``m/2`` steps.  Both excursions are
    evaluated at the same uniform times in bridge coordinates, so the two
    samples differ only through discretization.
    """
    if m < 4 or m % 2:
        raise ValueError("m must be even and at least 4")
    half = m // 2
    fine_out = np.empty(n_excursions * pairs)
    coarse_out = np.empty(n_excursions * pairs)
    for i in range(n_excursions):
        bridge = sample_brownian_bridge(m, rng)
        fine, kf = vervaat(bridge)
        coarse, kc = vervaat(bridge[::2].copy())
        tf = ExcursionTree(fine / math.sqrt(m))
        tc = ExcursionTree(coarse / math.sqrt(m))  # same Brownian path, same scale
        u = rng.random(2 * pairs)
        jf = (np.floor(u * m).astype(np.int64) - kf) % m
        jc = (np.floor(u * half).astype(np.int64) - kc) % half
        sl = slice(i * pairs, (i + 1) * pairs)
        fine_out[sl] = tf.index_distances(jf[0::2], jf[1::2])
        coarse_out[sl] = tc.index_distances(jc[0::2], jc[1::2])
    return fine_out, coarse_out


# ---------------------------------------------------------------------------
# sampling operations
# ---------------------------------------------------------------------------


def pair_distance(d: Dendron, rng: np.random.Generator) -> float:
    """Distance between two i.i.d. points with distinct indices."""
    pts = d.sample_points(2, rng)
    return float(d.distances(pts[:1], pts[1:])[0])


def rho_r_dendron(d: Dendron, r: int, rng: np.random.Generator) -> np.ndarray:
    """``r x r`` distance matrix of ``r`` i.i.d. points (zero diagonal)."""
    if r < 1:
        raise ValueError("r must be at least 1")
    return d.distance_matrix(d.sample_points(r, rng))


def dendron_from_dict(spec: dict, rng: np.random.Generator | None = None) -> Dendron:
    """Build a dendron from a JSON record.

    ``{"kind": "point", "nu": {"kind": "geometric1", "q": 0.4447}}``,
    ``{"kind": "interval", "length": 1}`` or ``{"kind": "crt", "sigma": 1,
    "m": 65536}`` (the last needs ``rng``).
    """
    kind = spec.get("kind")
    if kind == "point":
        nu = dict(spec["nu"])
        return PointDendron(nu.pop("kind"), nu)
    if kind == "interval":
        return IntervalDendron(float(spec.get("length", 1.0)))
    if kind == "crt":
        return crt_dendron(float(spec.get("sigma", 1.0)), int(spec.get("m", DEFAULT_GRID)), rng)
    raise ValueError(f"unknown dendron kind {kind!r}")
