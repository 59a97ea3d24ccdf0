"""Crump-Mode-Jagers family trees stopped at a fixed number of vertices."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from ..tree_core import RootedTree, build_tree
from .attachment import sample_preferential_attachment


@dataclass(frozen=True)
class GapLaw:
    """Positive waiting-time law: ``exponential`` (rate), ``deterministic`` (c)
    or ``gamma`` (shape, scale)."""

    kind: str
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if self.kind not in ("exponential", "deterministic", "gamma"):
            raise ValueError(f"unknown gap law {self.kind!r}")
        if self.a <= 0 or self.b <= 0:
            raise ValueError("gap parameters must be positive")

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "exponential":
            return rng.exponential(1.0 / self.a, size)
        if self.kind == "deterministic":
            return np.full(size, self.a)
        return rng.gamma(self.a, self.b, size)

    def laplace(self, theta: float) -> float:
        """E exp(-theta G)."""
        if self.kind == "exponential":
            return self.a / (self.a + theta) if theta > -self.a else math.inf
        if self.kind == "deterministic":
            return math.exp(-theta * self.a)
        return (1.0 + self.b * theta) ** (-self.a) if theta > -1.0 / self.b else math.inf

    def laplace_slope(self, theta: float) -> float:
        """E G exp(-theta G), i.e. minus the derivative of :meth:`laplace`."""
        if self.kind == "exponential":
            return self.a / (self.a + theta) ** 2
        if self.kind == "deterministic":
            return self.a * math.exp(-theta * self.a)
        return self.a * self.b * (1.0 + self.b * theta) ** (-self.a - 1.0)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class BirthSpec:
    """Reproduction point process of one individual.

    ``kind="linear"``: births at rate ``chi * k + rho`` after k children.
    ``kind="renewal"``: at most ``max_children`` births; with
    ``mode="renewal"`` the gaps between consecutive births are i.i.d.
    ``gap``, with ``mode="independent"`` each birth time is an independent
    ``gap`` draw (so two independent Exp(1) births give the BST).
    """

    kind: str
    chi: float = 0.0
    rho: float = 1.0
    gap: GapLaw | None = None
    max_children: float = math.inf
    mode: str = "renewal"

    def __post_init__(self):
        if self.kind == "linear":
            if self.rho <= 0:
                raise ValueError("linear birth rates need rho > 0")
        elif self.kind == "renewal":
            if self.gap is None:
                raise ValueError("renewal birth process needs a gap law")
            if self.mode not in ("renewal", "independent"):
                raise ValueError(f"unknown mode {self.mode!r}")
            if self.mode == "independent" and math.isinf(self.max_children):
                raise ValueError("independent birth times need a finite number of children")
            if self.max_children < 0:
                raise ValueError("max_children must be nonnegative")
        else:
            raise ValueError(f"unknown birth kind {self.kind!r}")

    @classmethod
    def linear(cls, chi: float, rho: float) -> "BirthSpec":
        return cls("linear", chi=chi, rho=rho)

    @classmethod
    def yule(cls, rate: float = 1.0) -> "BirthSpec":
        return cls("renewal", gap=GapLaw("exponential", rate))

    @classmethod
    def bst(cls) -> "BirthSpec":
        return cls("renewal", gap=GapLaw("exponential", 1.0), max_children=2, mode="independent")

    def laplace(self, theta: float) -> float:
        """Laplace transform of the intensity measure of the birth process."""
        if self.kind == "linear":
            return _linear_laplace(self.chi, self.rho, theta)
        ell = self.gap.laplace(theta)
        big_n = self.max_children
        if self.mode == "independent":
            return big_n * ell
        if math.isinf(big_n):
            return ell / (1.0 - ell) if ell < 1 else math.inf
        return sum(ell**k for k in range(1, int(big_n) + 1))

    def laplace_slope(self, theta: float) -> float:
        """Integral of t exp(-theta t) against the intensity measure."""
        if self.kind == "linear":
            raise NotImplementedError("use the closed form for linear birth rates")
        ell = self.gap.laplace(theta)
        slope = self.gap.laplace_slope(theta)
        big_n = self.max_children
        if self.mode == "independent":
            return big_n * slope
        # d/dtheta of sum_k ell^k is sum_k k ell^(k-1) ell'
        if math.isinf(big_n):
            return slope / (1.0 - ell) ** 2
        return sum(k * ell ** (k - 1) for k in range(1, int(big_n) + 1)) * slope

    @property
    def mean_children(self) -> float:
        if self.kind == "linear":
            return math.inf if self.chi >= 0 else self.rho / -self.chi
        return self.max_children

    def to_dict(self) -> dict:
        if self.kind == "linear":
            return {"kind": "linear", "chi": self.chi, "rho": self.rho}
        n = None if math.isinf(self.max_children) else int(self.max_children)
        return {"kind": "renewal", "gap": self.gap.to_dict(), "max_children": n, "mode": self.mode}

    @classmethod
    def from_dict(cls, d: dict) -> "BirthSpec":
        if d["kind"] == "linear":
            return cls.linear(d["chi"], d["rho"])
        g = d["gap"]
        big_n = d.get("max_children")
        return cls(
            "renewal",
            gap=GapLaw(g["kind"], g.get("a", 1.0), g.get("b", 1.0)),
            max_children=math.inf if big_n is None else big_n,
            mode=d.get("mode", "renewal"),
        )


def _linear_laplace(chi: float, rho: float, theta: float, terms: int = 200_000) -> float:
    """sum over k >= 1 of prod_{j<k} rate_j / (rate_j + theta), rate_j = chi j + rho."""
    total = 0.0
    prod = 1.0
    for j in range(terms):
        rate = chi * j + rho
        if rate <= 0:
            break
        prod *= rate / (rate + theta)
        total += prod
        if prod < 1e-17 * max(total, 1.0):
            break
    return total


class _GapStream:
    def __init__(self, law: GapLaw, rng: np.random.Generator, block: int = 4096):
        self.law, self.rng, self.block = law, rng, block
        self.buf = law.draw(rng, block)
        self.i = 0

    def next(self) -> float:
        if self.i == self.block:
            self.buf = self.law.draw(self.rng, self.block)
            self.i = 0
        x = self.buf[self.i]
        self.i += 1
        return float(x)


class Extinction(RuntimeError):
    pass


def sample_cmj_tree(spec: BirthSpec, n: int, rng: np.random.Generator, max_restarts: int = 1000) -> RootedTree:
    """Family tree at the moment the population first reaches ``n``.

    Pending births sit in a priority queue keyed by birth time; ties are
    broken by scheduling order.  Linear birth rates give the same stopped
    tree as preferential attachment, so that kind is delegated.
    """
    if spec.kind == "linear":
        return sample_preferential_attachment(spec.chi, spec.rho, n, rng)
    if n < 1:
        raise ValueError("n must be positive")
    for _ in range(max_restarts):
        parent = _run_renewal(spec, n, rng)
        if parent is not None:
            return build_tree(parent)
    raise Extinction(f"population died out {max_restarts} times before reaching n={n}")


def _run_renewal(spec: BirthSpec, n: int, rng: np.random.Generator):
    gaps = _GapStream(spec.gap, rng)
    big_n = spec.max_children
    independent = spec.mode == "independent"
    parent = [-1]
    queue: list = []
    seq = 0

    def schedule(v: int, t: float) -> None:
        nonlocal seq
        if big_n < 1:
            return
        if independent:
            for _ in range(int(big_n)):
                heapq.heappush(queue, (t + gaps.next(), seq, v, big_n))
                seq += 1
        else:
            heapq.heappush(queue, (t + gaps.next(), seq, v, 1))
            seq += 1

    schedule(0, 0.0)
    while len(parent) < n:
        if not queue:
            return None
        t, _, v, k = heapq.heappop(queue)
        child = len(parent)
        parent.append(v)
        schedule(child, t)
        if not independent and k < big_n:
            heapq.heappush(queue, (t + gaps.next(), seq, v, k + 1))
            seq += 1
    return parent
