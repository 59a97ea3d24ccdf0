"""Limit constants: split-tree entropy chi, Malthusian parameter, CMJ size a."""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np
from scipy import optimize
from scipy.special import digamma

from ..generators.cmj import BirthSpec
from ..generators.split_trees import SplitSpec


class NonMalthusian(ValueError):
    """The intensity transform never crosses 1 on the search range."""


@dataclass(frozen=True)
class ChiEstimate:
    value: float
    stderr: float
    closed_form: float | None
    mc_samples: int

    def to_dict(self) -> dict:
        return asdict(self)


def _entropy_terms(v: np.ndarray) -> np.ndarray:
    """sum_i V_i log(1/V_i) per row, with 0 log 0 = 0."""
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(v > 0, -v * np.log(np.where(v > 0, v, 1.0)), 0.0)
    return t.sum(axis=1)


def chi_closed_form(spec: SplitSpec) -> float | None:
    """Exact chi for Dirichlet and fixed split vectors.

    For Dirichlet(alpha) with A = sum alpha, each V_i is Beta(alpha_i,
    A - alpha_i) and E[-V log V] = (alpha_i / A)(psi(A + 1) - psi(alpha_i + 1)).
    """
    kind, params = spec.splitter
    p = np.asarray(params, dtype=float)
    if kind == "fixed":
        return float(_entropy_terms(p[None, :])[0])
    if kind == "dirichlet":
        total = p.sum()
        return float(np.sum(p / total * (digamma(total + 1) - digamma(p + 1))))
    return None


def chi_of_split(spec: SplitSpec, mc_samples: int, rng: np.random.Generator) -> ChiEstimate:
    """Monte Carlo estimate of chi = sum_i E[V_i log(1/V_i)] with standard error.

    The closed form is attached when the splitter has one.  A trivial split
    vector (some V_i = 1) gives chi = 0 and a warning.
    """
    if mc_samples < 1:
        raise ValueError("mc_samples must be at least 1")
    if spec.is_trivial:
        warnings.warn("trivial split vector: chi = 0 and the split tree is degenerate", stacklevel=2)
    terms = _entropy_terms(spec.sample_vectors(rng, mc_samples))
    se = float(terms.std(ddof=1) / math.sqrt(mc_samples)) if mc_samples > 1 else math.inf
    return ChiEstimate(float(terms.mean()), se, chi_closed_form(spec), mc_samples)


def malthusian_alpha(laplace: Callable[[float], float], lo: float = 1e-12, hi: float = 1e6,
                     xtol: float = 1e-12) -> float:
    """Root of ``laplace(alpha) = 1`` for a decreasing intensity transform.

    The bracket starts at ``[lo, 1]`` and the upper end doubles until the
    transform drops below 1, never past ``hi``.  The root is then polished
    with Brent's method to ``xtol``.
    """

    def f(t):
        v = laplace(t)
        return math.inf if v is None or math.isnan(v) else v - 1.0

    if not f(lo) > 0:
        raise NonMalthusian(f"transform at {lo:g} is {f(lo) + 1:.6g} <= 1: process is not supercritical")
    b = 1.0
    while f(b) > 0:
        if b >= hi:
            raise NonMalthusian(f"transform stays above 1 up to {hi:g}")
        b = min(2 * b, hi)
    a = lo
    # shrink the lower end into the finite region so Brent sees finite values
    while math.isinf(f(a)):
        mid = 0.5 * (a + b)
        if f(mid) > 0:
            a = mid
        else:
            b = mid
    return float(optimize.brentq(f, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps))


@dataclass(frozen=True)
class CmjConstants:
    alpha: float
    beta: float
    a: float
    provenance: str

    @property
    def two_a(self) -> float:
        return 2 * self.a

    def to_dict(self) -> dict:
        return {**asdict(self), "two_a": self.two_a}


def cmj_char_size(spec: BirthSpec) -> CmjConstants:
    """Malthusian alpha, beta = int t exp(-alpha t) mu(dt) and a = 1/(alpha beta).

    Linear birth rates chi k + rho have alpha = chi + rho and beta = 1/rho,
    hence a = rho/(chi + rho).  Renewal processes solve for alpha
    numerically and take beta from the closed-form slope of the transform.
    """
    if spec.kind == "linear":
        alpha = float(spec.chi + spec.rho)
        if alpha <= 0:
            raise NonMalthusian(f"chi + rho = {alpha} is not positive")
        beta = 1.0 / spec.rho
        return CmjConstants(alpha, beta, 1.0 / (alpha * beta), "closed form for linear rates")
    alpha = malthusian_alpha(spec.laplace)
    beta = spec.laplace_slope(alpha)
    if not (beta > 0 and math.isfinite(beta)):
        raise NonMalthusian(f"beta = {beta} is not finite and positive")
    return CmjConstants(alpha, beta, 1.0 / (alpha * beta), "numeric Malthusian root")


def split_char_size(spec: SplitSpec) -> float:
    """a = 1/chi for a split tree."""
    chi = chi_closed_form(spec)
    if not chi:
        raise ValueError("chi is zero or has no closed form")
    return 1.0 / chi


def condensation_kappa(offspring) -> float:
    """kappa of a subcritical offspring law, equal to its mean."""
    kappa = float(offspring.mean)
    if not 0 < kappa < 1:
        raise ValueError(f"offspring mean {kappa} is not in (0, 1): no condensation")
    return kappa
