"""Model-level convergence studies with pass/fail verdicts.

Each model record is mapped to the limit family it is expected to follow,
and :func:`run_study` runs the matching diagnostics over an ``n`` grid.  The
result is a :class:`ConvergenceReport` whose checks store the statistic,
threshold and outcome, so every verdict can be re-derived from the report.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import dendrons
from ..generators.models import SpecError, birth_spec_for, make_source
from ..generators.offspring import OffspringSpec
from ..generators.split_trees import SplitSpec
from ..tree_core import Histogram, histogram
from .constants import chi_closed_form, cmj_char_size, condensation_kappa
from .convergence import (
    Scaling,
    condensation_profile,
    fit_slope,
    lca_depth_profile,
    pairs_in_tree,
    replicate,
    scaled_distance_samples,
    tail_probabilities,
    tightness_report,
    tv_to_geometric1,
)
from .stats import ks_statistic

LOG_MODELS = ("bst", "rrt", "port", "bst_pa", "pa", "bary", "yule", "cmj", "split")

DEFAULT_SCALING = {
    "logarithmic": "1/log n",
    "crt": "1/sqrt n",
    "condensation": "none",
    "type3": "none",
    "interval": "1/n",
    "star": "none",
    "lca_tail": "none",
    "superstar": "none",
}


@dataclass
class Check:
    name: str
    statistic: float
    op: str
    threshold: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.statistic = float(self.statistic)
        self.threshold = float(self.threshold)
        if self.op == "<=":
            self.passed = self.statistic <= self.threshold
        elif self.op == ">=":
            self.passed = self.statistic >= self.threshold
        else:
            raise ValueError(f"unknown comparison {self.op!r}")


@dataclass
class ConvergenceReport:
    model: dict
    family: str
    scaling: str
    n_grid: list
    per_n: list
    target: dict
    checks: list
    fit: dict | None = None
    extra: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = "pass" if self.verdict else "fail"
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def limit_family(spec: dict) -> str:
    """Name of the limit family a model record is expected to follow."""
    model = spec.get("model")
    if model in LOG_MODELS:
        return "logarithmic"
    if model == "cgw":
        off = OffspringSpec.from_dict(spec.get("offspring", {"kind": "poisson", "lam": 1.0}))
        if off.kind == "power_law" and off.mean < 1:
            return "condensation"
        return "crt"
    if model == "sgw":
        return "type3"
    if model == "path":
        return "interval"
    if model in ("star", "superstar"):
        return model
    if model == "complete_bary":
        return "lca_tail"
    raise SpecError(f"no limit family declared for model {model!r}")


def log_target(spec: dict) -> dict:
    """Target slope ``2a`` for a logarithmic model, with its provenance."""
    if spec.get("model") == "split":
        sp = SplitSpec.from_dict(spec.get("split", {}))
        chi = chi_closed_form(sp)
        return {"name": "2a", "value": 2.0 / chi, "chi": chi, "provenance": "a = 1/chi for split trees"}
    birth = birth_spec_for(spec)
    c = cmj_char_size(birth)
    return {"name": "2a", "value": c.two_a, "alpha": c.alpha, "beta": c.beta,
            "provenance": f"a = 1/(alpha beta), {c.provenance}"}


def _summaries(samples, scaling: Scaling) -> list:
    out = []
    for s in samples:
        c = scaling.factor(s.n)
        scaled = type(s)(s.n, s.scale * c, s.per_tree * c)
        out.append(scaled.summary())
    return out


def _raw_samples(source, grid, m_trees, m_pairs, rng, threads):
    return [scaled_distance_samples(source, "none", n, m_trees, m_pairs, rng, threads) for n in grid]


def run_study(spec: dict, n_grid, m_trees: int = 20, m_pairs: int = 500, scaling=None,
              rng: np.random.Generator | None = None, threads: int = 1, slope_tol: float = 0.10,
              crt_grid: int = dendrons.DEFAULT_GRID, tightness: bool = False,
              config: dict | None = None) -> tuple[ConvergenceReport, dict]:
    """Run the diagnostics of the model's limit family.

    Returns the report and a dict of named histograms (pmfs of raw pair
    distances per ``n`` and family-specific profiles) for CSV export.
    """
    rng = rng if rng is not None else np.random.default_rng()
    family = limit_family(spec)
    source = make_source(spec)
    grid = [int(n) for n in n_grid]
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("n grid must be nonempty and strictly increasing")
    sc = Scaling.parse(scaling if scaling is not None else DEFAULT_SCALING[family])
    hists: dict[str, Histogram] = {}
    checks: list[Check] = []
    extra: dict = {}
    fit = None
    target: dict = {}

    if family == "condensation":
        per_n, target = _condensation(spec, source, grid, m_trees, m_pairs, rng, threads, checks, hists)
    elif family == "type3":
        per_n, target = _type3(source, grid, m_trees, m_pairs, rng, threads, checks, hists)
    elif family == "lca_tail":
        per_n, target = _lca_tail(spec, source, grid, m_trees, m_pairs, rng, threads, checks, hists)
    elif family == "superstar":
        per_n, target = _superstar(spec, source, grid, m_pairs, rng, checks, hists)
    else:
        samples = _raw_samples(source, grid, m_trees, m_pairs, rng, threads)
        for s in samples:
            hists[f"distance_n{s.n}"] = histogram(s.pooled.astype(np.int64))
        per_n = _summaries(samples, sc)
        last = samples[-1]
        if family == "logarithmic":
            if len(grid) < 3 or grid[-1] / grid[0] < 100:
                raise ValueError("logarithmic studies need at least 3 grid points spanning a factor of 100")
            raw = [s.summary() for s in samples]
            fit_obj = fit_slope(grid, [r["mean"] for r in raw], [r["stderr"] for r in raw])
            fit = fit_obj.to_dict()
            target = log_target(spec)
            rel = abs(fit_obj.slope - target["value"]) / target["value"]
            checks.append(Check("relative slope error", rel, "<=", slope_tol))
        elif family == "crt":
            off = OffspringSpec.from_dict(spec.get("offspring", {"kind": "poisson", "lam": 1.0}))
            law = off if abs(off.mean - 1) < 1e-12 else off.tilted_to_mean(1.0)
            sigma = math.sqrt(law.variance)
            x = last.pooled / math.sqrt(last.n)
            y = dendrons.crt_pair_distances(sigma, crt_grid, x.size, rng)
            target = {"name": "CRT pair distance", "sigma": sigma, "grid": crt_grid,
                      "provenance": "excursion tree coded by (2/sigma) e"}
            extra["crt_mean"] = float(y.mean())
            checks.append(Check(f"KS(d/sqrt n, CRT) at n={last.n}", ks_statistic(x, y), "<=", 0.05))
        elif family == "interval":
            x = last.pooled / last.n
            target = {"name": "mean of |U - V|", "value": 1 / 3, "provenance": "interval [0, 1]"}
            extra["ks_interval"] = ks_statistic(x, lambda t: np.clip(2 * t - t * t, 0.0, 1.0))
            checks.append(Check(f"|mean d/n - 1/3| at n={last.n}", abs(x.mean() - 1 / 3), "<=", 0.01))
        elif family == "star":
            target = {"name": "P(d = 2)", "value": 1.0, "provenance": "point dendron with a = 1"}
            checks.append(Check(f"P(d=2) at n={last.n}", np.mean(last.pooled == 2), ">=", 0.999))

    if tightness:
        rep = tightness_report(source, sc, grid, (0.5, 0.9, 0.99), m_trees, m_pairs, rng, threads=threads)
        extra["tightness"] = rep.to_dict()
        checks.append(Check("tightness envelope slope", rep.envelope_slope, "<=", rep.slope_tol))

    report = ConvergenceReport(
        model=dict(spec), family=family, scaling=str(sc), n_grid=grid, per_n=per_n, target=target,
        checks=checks, fit=fit, extra=extra, config=dict(config or {}),
    )
    return report, hists


def _condensation(spec, source, grid, m_trees, m_pairs, rng, threads, checks, hists):
    off = OffspringSpec.from_dict(spec["offspring"])
    kappa = condensation_kappa(off)
    q = 1 - kappa
    per_n = []
    for n in grid:
        def one(child):
            tree = source(n, child)
            return condensation_profile(tree, m_pairs, child), tree.n

        results = replicate(one, rng, m_trees, threads)
        profs = [p for p, _ in results]
        pooled = histogram(np.concatenate([p.samples for p in profs]))
        tvs = np.array([tv_to_geometric1(p.pmf, q) for p in profs])
        ratio = np.array([p.max_degree / size for p, size in results])
        row = {
            "n": n, "m_trees": m_trees, "m_pairs": m_pairs,
            "max_degree_ratio": float(ratio.mean()),
            "tv_geometric": tv_to_geometric1(pooled, q),
            "additivity_failure": float(np.mean([p.additivity_failure for p in profs])),
            "tree_tv_q90": float(np.quantile(tvs, 0.9)),
        }
        per_n.append(row)
        hists[f"vstar_distance_n{n}"] = pooled
    last = per_n[-1]
    n = last["n"]
    checks.append(Check(f"|max degree/n - (1 - kappa)| at n={n}", abs(last["max_degree_ratio"] - q), "<=", 0.1))
    checks.append(Check(f"TV(d(xi, v*), Ge(1 - kappa)) at n={n}", last["tv_geometric"], "<=", 0.05))
    checks.append(Check(f"additivity failure frequency at n={n}", last["additivity_failure"], "<=", 0.02))
    checks.append(Check(f"per-tree TV 90th percentile at n={n}", last["tree_tv_q90"], "<=", 0.08))
    target = {"name": "Ge(1 - kappa) on {1, 2, ...}", "kappa": kappa, "q": q,
              "provenance": "kappa is the offspring mean"}
    return per_n, target


def _type3(source, grid, m_trees, m_pairs, rng, threads, checks, hists):
    per_n = []
    for n in grid:
        def one(child):
            tree = source(n, child)
            return pairs_in_tree(tree, m_pairs, child), int(tree.outdegree[0])

        results = replicate(one, rng, m_trees, threads)
        d = np.concatenate([r[0] for r in results])
        root = np.array([r[1] for r in results])
        per_n.append({"n": n, "m_trees": m_trees, "m_pairs": m_pairs, "p_d2": float(np.mean(d == 2)),
                      "root_degree_ok": float(np.mean(root >= n - 10)), "root_degree_mean": float(root.mean())})
        hists[f"distance_n{n}"] = histogram(d)
    last = per_n[-1]
    checks.append(Check(f"P(d=2) at n={last['n']}", last["p_d2"], ">=", 0.9))
    checks.append(Check(f"share of trees with root degree >= n-10 at n={last['n']}", last["root_degree_ok"], ">=", 0.95))
    return per_n, {"name": "P(d = 2) -> 1", "provenance": "one vertex of degree n - O(1)"}


def _lca_tail(spec, source, grid, m_trees, m_pairs, rng, threads, checks, hists):
    b = int(spec.get("b", 2))
    per_n = []
    for h in grid:
        prof = lca_depth_profile(source, h, m_trees, m_pairs, rng, threads)
        hists[f"lca_depth_h{h}"] = prof
        tails = tail_probabilities(prof)
        total = m_trees * m_pairs
        excess = max(
            p - (b**-k + 3 * math.sqrt(b**-k * (1 - b**-k) / total)) for k, p in tails.items()
        )
        per_n.append({"n": h, "tails": {str(k): v for k, v in tails.items()}, "excess_over_bound": float(excess)})
    last = per_n[-1]
    checks.append(Check(f"max_k P(lca depth >= k) - bound(k) at h={last['n']}", last["excess_over_bound"], "<=", 0.0))
    return per_n, {"name": "P(lca depth >= k) <= b**-k", "b": b,
                   "provenance": "bound plus three binomial standard errors"}


def _superstar(spec, source, grid, m_pairs, rng, checks, hists):
    probs = {int(k): float(v) for k, v in dict(spec.get("p", {1: 0.5, 2: 0.5})).items()}
    norm = sum(k * p for k, p in probs.items())
    expected = {j: sum(p for k, p in probs.items() if k >= j) / norm for j in range(1, max(probs) + 1)}
    per_n = []
    for n in grid:
        tree = source(n, rng)
        depth = tree.depth[rng.integers(0, tree.n, size=m_pairs)]
        pmf = histogram(depth)
        hists[f"depth_n{n}"] = pmf
        err = max(abs(pmf.get(j, 0.0) - expected.get(j, 0.0)) for j in set(pmf) | set(expected))
        per_n.append({"n": n, "vertices": tree.n, "depth_pmf": {str(k): v for k, v in pmf.items()},
                      "max_abs_error": float(err)})
    last = per_n[-1]
    checks.append(Check(f"max |depth pmf - expected| at n={last['n']}", last["max_abs_error"], "<=", 0.02))
    return per_n, {"name": "depth law", "pmf": {str(k): v for k, v in expected.items()},
                   "provenance": "arm-length profile"}
