"""Offspring distributions for Galton-Watson trees."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import optimize, special, stats


@dataclass(frozen=True)
class OffspringSpec:
    """Offspring law of a Galton-Watson process.

    ``kind`` is one of ``poisson`` (``lam``), ``geometric`` (``p``; pmf
    ``p (1-p)^k`` on k >= 0), ``finite`` (``probs`` mapping k -> p_k) or
    ``power_law`` (``p0``, ``beta``; p_k = (1-p0) k^-beta / zeta(beta), k >= 1).
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        k = self.kind
        p = self.params
        if k == "poisson":
            if not p.get("lam", 0) > 0:
                raise ValueError("poisson offspring needs lam > 0")
        elif k == "geometric":
            if not 0 < p.get("p", 0) < 1:
                raise ValueError("geometric offspring needs 0 < p < 1")
        elif k == "finite":
            probs = {int(a): float(b) for a, b in p["probs"].items()}
            if any(a < 0 for a in probs) or any(b < 0 for b in probs.values()):
                raise ValueError("finite offspring law needs nonnegative support and masses")
            if abs(sum(probs.values()) - 1.0) > 1e-12:
                raise ValueError(f"probabilities sum to {sum(probs.values())}, not 1")
            object.__setattr__(self, "params", {"probs": probs})
        elif k == "power_law":
            if not 0 < p.get("p0", 0) < 1 or not p.get("beta", 0) > 1:
                raise ValueError("power_law offspring needs 0 < p0 < 1 and beta > 1")
        else:
            raise ValueError(f"unknown offspring kind {k!r}")
        if self.pmf(np.array([0]))[0] <= 0:
            raise ValueError("offspring law must put mass on 0 for finite trees")

    # -- constructors -------------------------------------------------------

    @classmethod
    def poisson(cls, lam: float = 1.0) -> "OffspringSpec":
        return cls("poisson", {"lam": float(lam)})

    @classmethod
    def geometric(cls, p: float = 0.5) -> "OffspringSpec":
        return cls("geometric", {"p": float(p)})

    @classmethod
    def finite(cls, probs) -> "OffspringSpec":
        return cls("finite", {"probs": dict(probs)})

    @classmethod
    def power_law(cls, p0: float = 0.5, beta: float = 4.0) -> "OffspringSpec":
        return cls("power_law", {"p0": float(p0), "beta": float(beta)})

    @classmethod
    def from_dict(cls, d: dict) -> "OffspringSpec":
        d = dict(d)
        kind = d.pop("kind")
        if kind == "poisson" and "lambda" in d:
            d["lam"] = d.pop("lambda")
        if kind == "finite" and "probs" in d:
            d["probs"] = {int(k): v for k, v in d["probs"].items()}
        return cls(kind, d)

    def to_dict(self) -> dict:
        if self.kind == "finite":
            return {"kind": "finite", "probs": {str(k): v for k, v in self.params["probs"].items()}}
        return {"kind": self.kind, **self.params}

    @classmethod
    def parse(cls, text: str) -> "OffspringSpec":
        """Parse the short CLI form, e.g. ``poisson:1`` or ``finite:0=0.5,2=0.5``."""
        kind, _, rest = text.partition(":")
        if kind == "poisson":
            return cls.poisson(float(rest or 1.0))
        if kind == "geometric":
            return cls.geometric(float(rest or 0.5))
        if kind == "power_law":
            vals = [float(x) for x in rest.split(",")] if rest else []
            return cls.power_law(*vals)
        if kind == "finite":
            probs = {}
            for item in rest.split(","):
                k, _, v = item.partition("=")
                probs[int(k)] = float(v)
            return cls.finite(probs)
        raise ValueError(f"cannot parse offspring spec {text!r}")

    # -- distribution -------------------------------------------------------

    def pmf(self, k) -> np.ndarray:
        k = np.asarray(k)
        p = self.params
        if self.kind == "poisson":
            return stats.poisson.pmf(k, p["lam"])
        if self.kind == "geometric":
            return np.where(k >= 0, p["p"] * (1 - p["p"]) ** np.maximum(k, 0), 0.0)
        if self.kind == "finite":
            out = np.zeros(k.shape)
            for a, b in p["probs"].items():
                out[k == a] = b
            return out
        kf = np.maximum(k, 1).astype(np.float64)
        tail = (1 - p["p0"]) * kf ** (-p["beta"]) / special.zeta(p["beta"])
        return np.where(k == 0, p["p0"], np.where(k >= 1, tail, 0.0))

    def log_pmf(self, k) -> np.ndarray:
        k = np.asarray(k)
        p = self.params
        if self.kind == "power_law":
            kf = np.maximum(k, 1).astype(np.float64)
            tail = math.log(1 - p["p0"]) - p["beta"] * np.log(kf) - math.log(special.zeta(p["beta"]))
            return np.where(k == 0, math.log(p["p0"]), tail)
        with np.errstate(divide="ignore"):
            return np.log(self.pmf(k))

    @cached_property
    def mean(self) -> float:
        p = self.params
        if self.kind == "poisson":
            return p["lam"]
        if self.kind == "geometric":
            return (1 - p["p"]) / p["p"]
        if self.kind == "finite":
            return sum(a * b for a, b in p["probs"].items())
        if p["beta"] <= 2:
            return math.inf
        return (1 - p["p0"]) * special.zeta(p["beta"] - 1) / special.zeta(p["beta"])

    @cached_property
    def variance(self) -> float:
        p = self.params
        if self.kind == "poisson":
            return p["lam"]
        if self.kind == "geometric":
            return (1 - p["p"]) / p["p"] ** 2
        if self.kind == "finite":
            m = self.mean
            return sum(b * (a - m) ** 2 for a, b in p["probs"].items())
        if p["beta"] <= 3:
            return math.inf
        second = (1 - p["p0"]) * special.zeta(p["beta"] - 2) / special.zeta(p["beta"])
        return second - self.mean**2

    @property
    def max_degree(self) -> float:
        if self.kind == "finite":
            return max(k for k, v in self.params["probs"].items() if v > 0)
        return math.inf

    @cached_property
    def span(self) -> int:
        """gcd of the support (every offspring value is a multiple of it)."""
        if self.kind == "finite":
            support = [k for k, v in self.params["probs"].items() if v > 0 and k > 0]
            return math.gcd(*support) if support else 0
        return 1

    def is_feasible(self, n: int) -> bool:
        """Whether P(|T| = n) > 0."""
        if n < 1:
            return False
        if n == 1:
            return True
        g = self.span
        if g == 0:
            return False
        return (n - 1) % g == 0 and (n - 1) <= n * self.max_degree

    def sample(self, rng: np.random.Generator, size: int, cap: int | None = None) -> np.ndarray:
        """i.i.d. draws; values above ``cap`` (if given) are reported as ``cap + 1``."""
        p = self.params
        if self.kind == "poisson":
            return rng.poisson(p["lam"], size)
        if self.kind == "geometric":
            return rng.geometric(p["p"], size) - 1
        if self.kind == "finite":
            ks = np.array(sorted(p["probs"]), dtype=np.int64)
            ps = np.array([p["probs"][k] for k in ks])
            return ks[rng.choice(ks.size, size=size, p=ps / ps.sum())]
        if cap is None:
            raise ValueError("power-law sampling needs a cap")
        return _sample_from_survival(self._survival(cap), rng, size)

    def _survival(self, cap: int) -> np.ndarray:
        """sf[k] = P(X >= k) for k = 0..cap+1, built from the tail for accuracy."""
        k = np.arange(1, cap + 1)
        pk = self.pmf(k)
        tail_beyond = self._tail_above(cap)
        sf = np.empty(cap + 2)
        sf[cap + 1] = tail_beyond
        sf[1 : cap + 1] = tail_beyond + np.cumsum(pk[::-1])[::-1]
        sf[0] = 1.0
        return sf

    def _tail_above(self, cap: int) -> float:
        p = self.params
        if self.kind != "power_law":
            return float(1.0 - self.pmf(np.arange(cap + 1)).sum())
        # Hurwitz zeta gives sum_{k > cap} k^-beta exactly
        return float((1 - p["p0"]) * special.zeta(p["beta"], cap + 1) / special.zeta(p["beta"]))

    # -- tilting ------------------------------------------------------------

    def tilted_to_mean(self, target: float = 1.0) -> "OffspringSpec | None":
        """Exponentially tilted law with the given mean, if one exists.

        Tilting leaves the law of the size-conditioned tree unchanged.
        Returns ``None`` when the moment generating function blows up first.
        """
        p = self.params
        if self.kind == "poisson":
            return OffspringSpec.poisson(target)
        if self.kind == "geometric":
            return OffspringSpec.geometric(1.0 / (1.0 + target))
        if self.kind == "finite":
            ks = np.array(sorted(p["probs"]), dtype=np.float64)
            logp = np.log(np.array([p["probs"][int(k)] for k in ks]))
            if not ks.min() < target < ks.max():
                return None

            def mean_at(theta):
                w = logp + theta * ks
                w = np.exp(w - w.max())
                return float((w * ks).sum() / w.sum()) - target

            theta = optimize.brentq(mean_at, -50, 50, xtol=1e-14)
            w = logp + theta * ks
            w = np.exp(w - w.max())
            w /= w.sum()
            return OffspringSpec.finite({int(k): float(x) for k, x in zip(ks, w) if x > 0})
        return None


def _sample_from_survival(sf: np.ndarray, rng: np.random.Generator, size: int) -> np.ndarray:
    """Inverse-survival sampling: X = #{k >= 1 : sf[k] > U}."""
    u = rng.random(size)
    # sf[1:] is non-increasing; count entries strictly greater than u
    desc = sf[1:]
    asc = desc[::-1]
    return (desc.size - np.searchsorted(asc, u, side="right")).astype(np.int64)


DEFAULT_TYPE_II = OffspringSpec.power_law(0.5, 4.0)
