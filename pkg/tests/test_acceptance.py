"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline; they
are also written straight to the terminal when output is captured.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from treelimit import exact_distance_distribution, exact_mean_distance, rho_r, sample_vertices
from treelimit.analysis import (
    chi_closed_form,
    chi_of_split,
    cmj_char_size,
    condensation_kappa,
    ks_statistic,
    run_study,
    tightness_report,
)
from treelimit.dendrons import (
    ExcursionDendron,
    crt_pair_distances,
    refinement_pair_samples,
    rho_r_dendron,
    sample_brownian_excursion,
)
from treelimit.generators import BirthSpec, OffspringSpec, SplitSpec, make_source
from treelimit.generators.galton_watson import cycle_lemma_rotate
from treelimit.tree_core import bfs_distances, four_point_violation, naive_lca

from conftest import random_parent_tree


@pytest.fixture
def report(capsys):
    def emit(number, title, passed, elapsed, budget, detail):
        verdict = "PASS" if passed else "FAIL"
        line = f"[acceptance {number}] {verdict} {title}: {detail} ({elapsed:.1f} s, budget {budget:g} s)"
        with capsys.disabled():
            print("\n" + line)

    return emit


def check(cond_map):
    """All named conditions hold, and a compact description of each."""
    return all(ok for ok, _ in cond_map.values()), "; ".join(f"{k} {d}" for k, (_, d) in cond_map.items())


# 1 -------------------------------------------------------------------------------


def _valid_rotations(d):
    """Indices j for which the rotation starting at j is a valid preorder code."""
    n = d.size
    rows = np.stack([np.roll(d, -j) for j in range(n)])
    walks = np.cumsum(rows - 1, axis=1)
    return np.flatnonzero(walks[:, :-1].min(axis=1, initial=0) >= 0)


def test_criterion_1_exact_oracles(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    lca_ok = dist_ok = mean_ok = True
    worst_rel = 0.0
    for i in range(100):
        n = int(rng.integers(2, 501))
        tree = random_parent_tree(n, rng) if i % 2 else make_source({"model": "rrt"})(n, rng)
        sources = rng.choice(n, size=min(n, 10), replace=False)
        for s in sources:
            d_ref = bfs_distances(tree, int(s))
            dist_ok &= np.array_equal(tree.pair_distances(np.full(n, s), np.arange(n)), d_ref)
        us, vs = rng.integers(0, n, 200), rng.integers(0, n, 200)
        lcas = tree.pair_lcas(us, vs)
        lca_ok &= all(int(lcas[k]) == naive_lca(tree, int(us[k]), int(vs[k])) for k in range(200))
        h = exact_distance_distribution(tree)
        m_h = math.fsum(k * p for k, p in h.items())
        m_e = exact_mean_distance(tree)
        rel = abs(m_h - m_e) / m_e
        worst_rel = max(worst_rel, rel)
        mean_ok &= rel <= 1e-12

    unique_ok = True
    for _ in range(10**4):
        n = int(rng.integers(1, 40))
        # uniform random multiset of n outdegrees summing to n - 1, in random order
        d = np.bincount(rng.integers(0, n, size=n - 1), minlength=n).astype(np.int64)
        rng.shuffle(d)
        valid = _valid_rotations(d)
        unique_ok &= valid.size == 1 and np.array_equal(cycle_lemma_rotate(d), np.roll(d, -valid[0]))

    worst4 = 0.0
    src = make_source({"model": "cgw"})
    for _ in range(200):
        tree = src(int(rng.integers(4, 500)), rng)
        for _ in range(50):
            worst4 = max(worst4, four_point_violation(rho_r(tree, sample_vertices(tree, 4, rng))))
    for _ in range(100):
        dend = ExcursionDendron(sample_brownian_excursion(2**12, rng))
        for _ in range(100):
            worst4 = max(worst4, four_point_violation(rho_r_dendron(dend, 4, rng)))
    elapsed = time.perf_counter() - t0
    passed, detail = check({
        "distances vs BFS": (dist_ok, "ok" if dist_ok else "mismatch"),
        "LCA vs naive": (lca_ok, "ok" if lca_ok else "mismatch"),
        "mean rel err": (mean_ok, f"{worst_rel:.1e} <= 1e-12"),
        "cycle lemma": (unique_ok, "unique on 1e4 sequences" if unique_ok else "failed"),
        "four-point": (worst4 <= 1e-9, f"{worst4:.1e} on 1e4 tree + 1e4 excursion matrices"),
    })
    passed &= elapsed < 30
    report(1, "exact oracles", passed, elapsed, 30, detail)
    assert passed


# 2 -------------------------------------------------------------------------------


def test_criterion_2_constants(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    bst_chi = chi_of_split(SplitSpec.bst(), 10**6, rng)
    tri_chi = chi_of_split(SplitSpec.dirichlet([1, 1, 1]), 10**6, rng)
    yule = cmj_char_size(BirthSpec.yule())
    bst = cmj_char_size(BirthSpec.bst())
    pa = cmj_char_size(BirthSpec.linear(1.0, 1.0))
    elapsed = time.perf_counter() - t0

    def close(x, y, tol):
        return abs(x - y) <= tol

    conds = {
        "chi(U,1-U)": (close(bst_chi.value, 0.5, 1e-3) and close(chi_closed_form(SplitSpec.bst()), 0.5, 1e-8),
                       f"{bst_chi.value:.5f}"),
        "chi(Dir(1,1,1))": (close(tri_chi.value, 5 / 6, 2e-3)
                            and close(chi_closed_form(SplitSpec.dirichlet([1, 1, 1])), 5 / 6, 1e-8),
                            f"{tri_chi.value:.5f}"),
        "Yule": (all(close(v, 1.0, 1e-8) for v in (yule.alpha, yule.beta, yule.a)),
                 f"({yule.alpha:.9g}, {yule.beta:.9g}, {yule.a:.9g})"),
        "BST-CMJ": (close(bst.alpha, 1, 1e-8) and close(bst.beta, 0.5, 1e-8) and close(bst.a, 2, 1e-8),
                    f"({bst.alpha:.9g}, {bst.beta:.9g}, {bst.a:.9g})"),
        "a(1,1)": (close(pa.a, 0.5, 1e-8), f"{pa.a:.9g}"),
    }
    passed, detail = check(conds)
    passed &= elapsed < 1
    report(2, "constant solvers", passed, elapsed, 1, detail)
    assert passed


# 3 -------------------------------------------------------------------------------

SLOPE_MODELS = [
    ("BST", {"model": "bst"}, 4.0),
    ("RRT", {"model": "rrt"}, 2.0),
    ("PORT", {"model": "port"}, 1.0),
    ("PA(1,2)", {"model": "pa", "chi": 1, "rho": 2}, 4 / 3),
    ("3-ary", {"model": "bary", "b": 3}, 3.0),
    ("split Dir(1,1,1)", {"model": "split", "split": {"b": 3}}, 2.4),
]


def test_criterion_3_logarithmic_slopes(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    grid = [2**12, 2**14, 2**16, 2**18, 2**20]
    conds = {}
    for name, spec, target in SLOPE_MODELS:
        rep, _ = run_study(spec, grid, 20, 500, rng=rng)
        assert rep.target["value"] == pytest.approx(target, rel=1e-9)
        slope = rep.fit["slope"]
        conds[name] = (abs(slope - target) <= 0.10 * target, f"{slope:.3f} vs {target:.3f}")
    elapsed = time.perf_counter() - t0
    passed, detail = check(conds)
    passed &= elapsed < 300
    report(3, "logarithmic slopes within 10% of 2a", passed, elapsed, 300, detail)
    assert passed


# 4 -------------------------------------------------------------------------------


def test_criterion_4_crt(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    n = 10**4
    source = make_source({"model": "cgw", "offspring": {"kind": "poisson", "lam": 1.0}})
    x = np.empty(2000)
    for i, child in enumerate(rng.spawn(2000)):
        tree = source(n, child)
        u, v = child.integers(0, tree.n, size=2)
        x[i] = tree.pair_distances([u], [v])[0] / math.sqrt(n)
    y = crt_pair_distances(1.0, 2**16, 2000, rng)
    ks_crt = ks_statistic(x, y)
    fine, coarse = refinement_pair_samples(2**16, 2500, 20, rng)
    ks_grid = ks_statistic(fine, coarse)
    elapsed = time.perf_counter() - t0
    passed, detail = check({
        "KS(d/sqrt n, CRT)": (ks_crt <= 0.05, f"{ks_crt:.4f} <= 0.05"),
        "KS(m=2^16, m=2^15)": (ks_grid <= 0.01, f"{ks_grid:.4f} <= 0.01"),
    })
    passed &= elapsed < 300
    report(4, "CRT", passed, elapsed, 300, detail)
    assert passed


# 5 -------------------------------------------------------------------------------


def test_criterion_5_condensation(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    spec = {"model": "cgw", "offspring": {"kind": "power_law", "p0": 0.5, "beta": 4.0}}
    kappa = condensation_kappa(OffspringSpec.from_dict(spec["offspring"]))
    rep, _ = run_study(spec, [10**5], 20, 5000, rng=rng)
    elapsed = time.perf_counter() - t0
    row = rep.per_n[-1]
    passed, detail = check({
        "kappa": (abs(kappa - 0.5553) < 1e-4, f"{kappa:.5f}"),
        "Delta/n": (abs(row["max_degree_ratio"] - (1 - kappa)) <= 0.1, f"{row['max_degree_ratio']:.4f}"),
        "TV": (row["tv_geometric"] <= 0.05, f"{row['tv_geometric']:.4f} <= 0.05"),
        "additivity failure": (row["additivity_failure"] <= 0.02, f"{row['additivity_failure']:.4f} <= 0.02"),
        "per-tree TV q90": (row["tree_tv_q90"] <= 0.08, f"{row['tree_tv_q90']:.4f} <= 0.08"),
    })
    passed &= rep.verdict and elapsed < 120
    report(5, "condensation", passed, elapsed, 120, detail)
    assert passed


# 6 -------------------------------------------------------------------------------


def test_criterion_6_type3(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    rep, _ = run_study({"model": "sgw"}, [200], 100, 500, rng=rng)
    elapsed = time.perf_counter() - t0
    row = rep.per_n[-1]
    passed, detail = check({
        "P(d=2)": (row["p_d2"] >= 0.9, f"{row['p_d2']:.4f} >= 0.9"),
        "root degree >= n-10": (row["root_degree_ok"] >= 0.95, f"{row['root_degree_ok']:.2f} >= 0.95"),
    })
    passed &= rep.verdict and elapsed < 120
    report(6, "type III (w_k = k!)", passed, elapsed, 120, detail)
    assert passed


# 7 -------------------------------------------------------------------------------


def test_criterion_7_deterministic(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    star, _ = run_study({"model": "star"}, [10**4], 1, 10**4, rng=rng)
    path, _ = run_study({"model": "path"}, [10**4], 1, 10**4, rng=rng)
    binary, _ = run_study({"model": "complete_bary", "b": 2}, [20], 1, 10**5, rng=rng)
    sup, _ = run_study({"model": "superstar", "p": {1: 0.5, 2: 0.5}}, [10**5], 1, 10**5, rng=rng)
    # depth law of the superstar from its arm profile, computed exactly
    arms = {1: Fraction(1, 2), 2: Fraction(1, 2)}
    size = sum(k * p for k, p in arms.items())
    expected = {j: sum(p for k, p in arms.items() if k >= j) / size for j in arms}
    assert expected == {1: Fraction(2, 3), 2: Fraction(1, 3)}
    elapsed = time.perf_counter() - t0
    pmf = sup.per_n[-1]["depth_pmf"]
    passed, detail = check({
        "star P(d=2)": (star.verdict, f"{star.checks[0].statistic:.4f} >= 0.999"),
        "path mean": (path.verdict, f"|err| {path.checks[0].statistic:.4f} <= 0.01"),
        "binary LCA tail": (binary.verdict, f"max excess {binary.checks[0].statistic:.2e} <= 0"),
        "superstar": (sup.verdict and all(abs(pmf.get(str(k), 0.0) - float(v)) <= 0.02 for k, v in expected.items()),
                      f"({pmf.get('1', 0):.4f}, {pmf.get('2', 0):.4f})"),
    })
    passed &= elapsed < 60
    report(7, "deterministic families", passed, elapsed, 60, detail)
    assert passed


# 8 -------------------------------------------------------------------------------


def test_criterion_8_tightness(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    levels = (0.5, 0.9, 0.99)
    path = make_source({"model": "path"})
    tight = tightness_report(path, "1/n", [10**3, 10**4, 10**5], levels, 5, 1000, rng)
    loose = tightness_report(path, "none", [10**3, 10**4, 10**5], levels, 5, 1000, rng)
    t2 = make_source({"model": "cgw", "offspring": {"kind": "power_law", "p0": 0.5, "beta": 4.0}})
    cond = tightness_report(t2, "none", [10**3, 10**4, 10**5], levels, 20, 1000, rng)
    elapsed = time.perf_counter() - t0
    passed, detail = check({
        "path 1/n": (tight.tight, f"slope {tight.envelope_slope:.3f} -> {'tight' if tight.tight else 'not tight'}"),
        "path 1": (not loose.tight, f"slope {loose.envelope_slope:.3f} -> {'tight' if loose.tight else 'not tight'}"),
        "type II 1": (cond.tight, f"slope {cond.envelope_slope:.3f} -> {'tight' if cond.tight else 'not tight'}"),
    })
    report(8, "tightness diagnostics", passed, elapsed, float("inf"), detail)
    assert passed
