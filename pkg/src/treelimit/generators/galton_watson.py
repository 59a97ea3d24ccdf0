"""Size-conditioned Galton-Watson trees via the cycle lemma."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import optimize
from scipy.special import logsumexp

from .. import _kernels
from ..tree_core import RootedTree, from_preorder_degrees
from .offspring import OffspringSpec


class RejectionCapExceeded(RuntimeError):
    def __init__(self, spec, n, attempts, method):
        self.spec, self.n, self.attempts, self.method = spec, n, attempts, method
        super().__init__(
            f"no accepted degree sequence after {attempts} attempts "
            f"(method={method}, n={n}, offspring={spec.to_dict()}, mean={spec.mean:.6g})"
        )


class InfeasibleSize(ValueError):
    pass


def cycle_lemma_rotate(degrees) -> np.ndarray:
    """The unique cyclic rotation of ``degrees`` that is a valid preorder sequence.

    Requires ``sum(degrees) == len(degrees) - 1``.
    """
    d = np.asarray(degrees, dtype=np.int64)
    if d.sum() != d.size - 1:
        raise ValueError(f"degrees sum to {int(d.sum())}, expected {d.size - 1}")
    out = np.roll(d, -_kernels.cycle_lemma_start(d))
    walk = np.cumsum(out - 1)
    assert walk[:-1].min(initial=0) >= 0 and walk[-1] == -1
    return out


def choose_method(spec: OffspringSpec) -> str:
    if spec.kind == "poisson":
        return "multinomial"
    if spec.kind == "geometric":
        return "composition"
    if abs(spec.mean - 1.0) < 1e-12:
        return "rejection"
    if spec.kind == "power_law" and spec.mean < 1:
        return "condensation"
    if spec.tilted_to_mean(1.0) is not None:
        return "tilted"
    return "rejection"


def sample_conditioned_gw(
    spec: OffspringSpec,
    n: int,
    rng: np.random.Generator,
    max_attempts: int = 10**6,
    method: str | None = None,
) -> RootedTree:
    """Exact sample of a Galton-Watson tree conditioned on ``n`` vertices.

    Each attempt draws a fresh block of ``n`` i.i.d. outdegrees and keeps it
    only if they sum to ``n - 1``; a uniform rotation is applied first and the
    cycle lemma then picks the rotation that codes a tree.  Off-critical
    light-tailed laws are tilted to mean one (same conditioned law).
    Poisson and geometric laws have closed-form conditionals (multinomial
    with equal cells, uniform weak composition) that are sampled directly;
    ``method="rejection"`` forces the generic route.
    Subcritical power laws, where a plain rejection would essentially never
    accept, use a big-jump proposal, see :func:`_condensation_degrees`.
    """
    if not spec.is_feasible(n):
        raise InfeasibleSize(f"P(|T| = {n}) = 0 for offspring law {spec.to_dict()}")
    if n == 1:
        return from_preorder_degrees([0])
    method = method or choose_method(spec)
    if method == "condensation":
        degrees = _condensation_degrees(spec, n, rng, max_attempts)
    elif method == "multinomial":
        degrees = _multinomial_degrees(spec, n, rng)
    elif method == "composition":
        degrees = _composition_degrees(spec, n, rng)
    elif method not in ("rejection", "tilted"):
        raise ValueError(f"unknown method {method!r}")
    else:
        law = spec.tilted_to_mean(1.0) if method == "tilted" else spec
        degrees = _rejection_degrees(law, n, rng, max_attempts, method, spec)
    degrees = np.roll(degrees, int(rng.integers(n)))
    return from_preorder_degrees(cycle_lemma_rotate(degrees))


def _multinomial_degrees(spec, n, rng):
    """i.i.d. Poisson values given their sum are multinomial with equal cells."""
    if spec.kind != "poisson":
        raise ValueError("the multinomial method needs a Poisson law")
    return np.bincount(rng.integers(0, n, size=n - 1), minlength=n).astype(np.int64)


def _composition_degrees(spec, n, rng):
    """i.i.d. geometric values given their sum form a uniform weak composition."""
    if spec.kind != "geometric":
        raise ValueError("the composition method needs a geometric law")
    bars = np.sort(rng.choice(2 * n - 2, size=n - 1, replace=False))
    edges = np.concatenate(([-1], bars, [2 * n - 2]))
    return (np.diff(edges) - 1).astype(np.int64)


def _rejection_degrees(law, n, rng, max_attempts, method, spec):
    target = n - 1
    cap = target if law.kind == "power_law" else None
    for _ in range(max_attempts):
        x = law.sample(rng, n, cap=cap)
        if x.sum() == target:
            return x
    raise RejectionCapExceeded(spec, n, max_attempts, method)


def _condensation_degrees(spec: OffspringSpec, n: int, rng, max_attempts: int, mix: float = 63 / 64):
    """Exact conditioned degree sequence for a subcritical heavy-tailed law.

    The target is proportional to prod p(x_i) on {sum x_i = N}, N = n - 1.
    It is split by whether max x_i >= L:

    * big-jump branch: pick a position J, draw the other n - 1 values i.i.d.,
      put the remainder at J; keep it if it is at least L and J is the first
      position of the maximum, with probability p(x_J) / p(L).  Accepted
      vectors have density prod p(x_i) / (n p(L)) on {max >= L}.
    * no-big-jump branch: i.i.d. draws from the law truncated below L and
      tilted to mean N / n; a block summing to N has density
      prod p(x_i) * exp(theta N) / M(theta)^n.

    Branches are picked with probabilities (mix, 1 - mix) and the one with
    the larger constant is thinned so both contribute at the same constant.
    """
    N = n - 1
    L, log_pL, logp_all, sf, tilted, thin_a, thin_b = _condensation_setup(spec, n, mix)

    for _ in range(max_attempts):
        if rng.random() < mix:
            j = int(rng.integers(n))
            others = _sample_sf(sf, rng, n - 1)
            y = N - int(others.sum())
            if y < L:
                continue
            if j > 0 and others[:j].max() >= y:
                continue
            if j < n - 1 and others[j:].max() > y:
                continue
            if rng.random() < math.exp(logp_all[y] - log_pL) * thin_a:
                return np.insert(others, j, y)
        else:
            x = np.searchsorted(tilted, rng.random(n), side="right")
            x = np.minimum(x, L - 1)
            if x.sum() == N and rng.random() < thin_b:
                return x.astype(np.int64)
    raise RejectionCapExceeded(spec, n, max_attempts, "condensation")


@lru_cache(maxsize=16)
def _setup_cached(kind, params, n, mix):
    spec = OffspringSpec(kind, dict(params))
    N = n - 1
    L = max(2, math.ceil(N / 4))
    logp_all = spec.log_pmf(np.arange(N + 1))
    log_pL = float(logp_all[L])
    sf = spec._survival(N)

    ks = np.arange(L)
    logp = logp_all[:L]
    ratio = N / n

    def tilted_mean(theta):
        w = logp + theta * ks
        w = np.exp(w - w.max())
        return float((w * ks).sum() / w.sum()) - ratio

    theta = optimize.brentq(tilted_mean, -30.0, 30.0, xtol=1e-15)
    logw = logp + theta * ks
    log_m = float(logsumexp(logw))
    tilted = np.exp(logw - log_m)
    tilted_cdf = np.cumsum(tilted / tilted.sum())

    log_ca = math.log(mix) - math.log(n) - log_pL
    log_cb = math.log1p(-mix) + theta * N - n * log_m
    thin_a = math.exp(min(0.0, log_cb - log_ca))
    thin_b = math.exp(min(0.0, log_ca - log_cb))
    for a in (logp_all, sf, tilted_cdf):
        a.setflags(write=False)
    return L, log_pL, logp_all, sf, tilted_cdf, thin_a, thin_b


def _condensation_setup(spec, n, mix):
    """Tables for :func:`_condensation_degrees`, cached per (law, n)."""
    return _setup_cached(spec.kind, tuple(sorted(spec.params.items())), n, mix)


def _sample_sf(sf, rng, size):
    u = rng.random(size)
    desc = sf[1:]
    return (desc.size - np.searchsorted(desc[::-1], u, side="right")).astype(np.int64)
