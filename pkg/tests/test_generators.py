import math
from collections import Counter
from itertools import product

import numpy as np
import pytest
from scipy.special import zeta

from treelimit.analysis import ks_statistic, total_variation_discrete
from treelimit.generators import (
    DEFAULT_TYPE_II,
    BirthSpec,
    GapLaw,
    InfeasibleSize,
    OffspringSpec,
    SimplyGeneratedSampler,
    SplitSpec,
    bary,
    complete_bary,
    cycle_lemma_rotate,
    factorial_log_weights,
    make_source,
    path,
    port,
    rrt,
    sample_bst,
    sample_cmj_tree,
    sample_conditioned_gw,
    sample_preferential_attachment,
    sample_simply_generated_exact,
    sample_split_tree,
    star,
    superstar,
)
from treelimit.generators.cmj import Extinction
from treelimit.generators.models import MODELS, SpecError
from treelimit.tree_core import preorder_degrees, validate_lukasiewicz


def ordered_trees(n):
    """All preorder outdegree sequences of ordered trees with n vertices."""
    out = []

    def rec(seq, open_slots):
        # open_slots = vertices still owed; it may hit 0 only at the end
        if len(seq) == n:
            if open_slots == 0:
                out.append(tuple(seq))
            return
        if open_slots == 0:
            return
        for d in range(0, n - len(seq)):
            rec(seq + [d], open_slots - 1 + d)

    for d in range(0, n):
        rec([d], d)
    return out


def exact_law(n, weight):
    trees = ordered_trees(n)
    w = np.array([math.prod(weight(d) for d in t) for t in trees])
    return dict(zip(trees, w / w.sum()))


def tv_noise(law, m):
    """Expected TV between a law and its m-sample empirical version (normal approximation)."""
    p = np.array(list(law.values()))
    return float(np.sum(np.sqrt(p * (1 - p))) / math.sqrt(2 * math.pi * m))


def assert_matches(emp, law, m):
    tv = total_variation_discrete(emp, law)
    assert set(emp) <= set(law)
    assert tv <= 1.6 * tv_noise(law, m), (tv, tv_noise(law, m))


def empirical_law(trees):
    c = Counter(tuple(preorder_degrees(t)) for t in trees)
    total = sum(c.values())
    return {k: v / total for k, v in c.items()}


def test_catalan_enumeration():
    assert [len(ordered_trees(n)) for n in range(1, 8)] == [1, 1, 2, 5, 14, 42, 132]


# -- cycle lemma ---------------------------------------------------------------


def test_cycle_lemma_unique_rotation(rng):
    for _ in range(2000):
        n = int(rng.integers(1, 30))
        d = np.bincount(rng.integers(0, n, n - 1), minlength=n)  # any multiset summing to n-1
        d = rng.permutation(d)
        valid = 0
        for k in range(n):
            w = np.cumsum(np.roll(d, -k) - 1)
            valid += bool(w[-1] == -1 and (n == 1 or w[:-1].min() >= 0))
        assert valid == 1
        validate_lukasiewicz(cycle_lemma_rotate(d))


def test_cycle_lemma_rejects_bad_sum():
    with pytest.raises(ValueError):
        cycle_lemma_rotate([1, 1, 1])


# -- conditioned Galton-Watson ---------------------------------------------------


@pytest.mark.parametrize("method", ["composition", "rejection"])
def test_geometric_root_degree_n5(rng, method):
    # geometric CGW is uniform on the 14 ordered trees with 5 vertices;
    # root degree counts are 5, 5, 3, 1 for k = 1..4
    spec = OffspringSpec.geometric(0.5)
    m = 14000
    deg = [int(sample_conditioned_gw(spec, 5, rng, method=method).outdegree[0]) for _ in range(m)]
    freq = np.bincount(deg, minlength=5)[1:] / m
    assert freq == pytest.approx(np.array([5, 5, 3, 1]) / 14, abs=0.015)


def test_binary_trees_n5(rng):
    spec = OffspringSpec.finite({0: 0.5, 2: 0.5})
    emp = empirical_law([sample_conditioned_gw(spec, 5, rng) for _ in range(4000)])
    assert set(emp) == {(2, 2, 0, 0, 0), (2, 0, 2, 0, 0)}
    assert emp[(2, 2, 0, 0, 0)] == pytest.approx(0.5, abs=0.03)
    assert sample_conditioned_gw(spec, 3, rng).n == 3
    with pytest.raises(InfeasibleSize):
        sample_conditioned_gw(spec, 4, rng)


@pytest.mark.parametrize("spec", [OffspringSpec.poisson(1.0), OffspringSpec.poisson(2.5), OffspringSpec.geometric(0.3)])
def test_light_tailed_cgw_matches_enumeration(rng, spec):
    n = 6
    law = exact_law(n, lambda d: float(spec.pmf(np.array([d]))[0]))
    emp = empirical_law([sample_conditioned_gw(spec, n, rng) for _ in range(20000)])
    assert_matches(emp, law, 20000)


def test_tilted_rejection_matches_enumeration(rng):
    spec = OffspringSpec.finite({0: 0.5, 1: 0.2, 3: 0.3})
    assert abs(spec.mean - 1) > 0.05
    n = 7
    law = exact_law(n, lambda d: float(spec.pmf(np.array([d]))[0]))
    emp = empirical_law([sample_conditioned_gw(spec, n, rng) for _ in range(10000)])
    assert_matches(emp, law, 10000)


def test_condensation_sampler_matches_enumeration(rng):
    spec = DEFAULT_TYPE_II
    n = 6
    law = exact_law(n, lambda d: float(spec.pmf(np.array([d]))[0]))
    emp = empirical_law([sample_conditioned_gw(spec, n, rng, method="condensation") for _ in range(10000)])
    assert_matches(emp, law, 10000)


def test_poisson_multinomial_matches_rejection(rng):
    spec = OffspringSpec.poisson(1.0)
    a = [sample_conditioned_gw(spec, 300, rng).depth.mean() for _ in range(400)]
    b = [sample_conditioned_gw(spec, 300, rng, method="rejection").depth.mean() for _ in range(400)]
    assert ks_statistic(a, b) < 0.12


def test_type_ii_kappa_and_hub(rng):
    kappa = DEFAULT_TYPE_II.mean
    # independent series evaluation of sum_k k p_k
    k = np.arange(1, 200001, dtype=float)
    series = float(np.sum(0.5 * k**-3 / zeta(4)) + 0.5 / zeta(4) * 0.5 / 200000**2)
    assert kappa == pytest.approx(series, rel=1e-9)
    assert kappa == pytest.approx(0.5 * zeta(3) / zeta(4), rel=1e-12)
    assert kappa == pytest.approx(0.5553, abs=1e-4)
    t = sample_conditioned_gw(DEFAULT_TYPE_II, 20000, rng)
    assert abs(t.outdegree.max() / t.n - (1 - kappa)) < 0.05


def test_offspring_laws():
    for spec in (OffspringSpec.poisson(1.3), OffspringSpec.geometric(0.4), OffspringSpec.finite({0: 0.25, 1: 0.5, 2: 0.25}), DEFAULT_TYPE_II):
        k = np.arange(0, 4000)
        p = spec.pmf(k)
        assert p.sum() == pytest.approx(1.0, abs=1e-6)
        assert (k * p).sum() == pytest.approx(spec.mean, rel=1e-4)
    tilted = OffspringSpec.poisson(2.0).tilted_to_mean(1.0)
    assert tilted.mean == pytest.approx(1.0, abs=1e-10)
    assert OffspringSpec.parse("poisson:1").to_dict() == {"kind": "poisson", "lam": 1.0}
    assert OffspringSpec.from_dict({"kind": "poisson", "lambda": 2.0}).mean == 2.0


# -- type III -------------------------------------------------------------------


def test_simply_generated_matches_enumeration(rng):
    n = 6
    law = exact_law(n, lambda d: math.factorial(d))
    sampler = SimplyGeneratedSampler(n, log_weights=factorial_log_weights(n))
    emp = empirical_law([sampler.sample(rng) for _ in range(20000)])
    assert_matches(emp, law, 20000)
    weights = [1.0, 2.0, 0.5, 3.0, 1.0, 1.0]
    law2 = exact_law(n, lambda d: weights[d])
    sampler2 = SimplyGeneratedSampler(n, weights=weights)
    emp2 = empirical_law([sampler2.sample(rng) for _ in range(20000)])
    assert_matches(emp2, law2, 20000)
    assert sample_simply_generated_exact(n, rng, weights=weights).n == n


def test_factorial_weights_n200_root(rng):
    sampler = SimplyGeneratedSampler(200, log_weights=factorial_log_weights(200))
    z = [199 - int(sampler.sample(rng).outdegree[0]) for _ in range(200)]
    # root degree n - 1 - Z with Z close to Poisson(1)
    assert np.mean(z) == pytest.approx(1.0, abs=0.25)


# -- split trees and BST ----------------------------------------------------------


def test_split_tree_ball_conservation(rng):
    for spec in (SplitSpec.bst(), SplitSpec.dirichlet([1, 1, 1]), SplitSpec.dirichlet([2, 1], s=3, s0=1)):
        for method in ("counts", "sequential"):
            st = sample_split_tree(spec, 2000, rng, method=method)
            assert st.balls.sum() == 2000
            t = st.tree
            leaves = t.outdegree == 0
            assert np.all(st.balls[leaves] >= 1)
            assert np.all(st.balls <= spec.s)
            assert np.all(t.outdegree <= spec.b)


def test_split_methods_agree(rng):
    spec = SplitSpec.dirichlet([1, 1, 1], s=2, s0=1)
    a = [sample_split_tree(spec, 3000, rng).tree for _ in range(150)]
    b = [sample_split_tree(spec, 3000, rng, method="sequential").tree for _ in range(150)]
    assert ks_statistic([t.n for t in a], [t.n for t in b]) < 0.2
    assert ks_statistic(np.concatenate([t.depth for t in a]), np.concatenate([t.depth for t in b])) < 0.03


def test_split_s1_warns(rng):
    with pytest.warns(UserWarning):
        sample_split_tree(SplitSpec(2, 3, 1, 1, ("dirichlet", (1.0, 1.0))), 50, rng)


def test_trivial_split_rejected(rng):
    with pytest.raises(ValueError):
        sample_split_tree(SplitSpec(2, 1, 1, 0, ("fixed", (1.0, 0.0))), 10, rng)


def test_bst_methods_identical_shape_law(rng):
    for n in (1, 2, 7):
        t = sample_bst(n, rng)
        assert t.n == n and np.all(t.outdegree <= 2)
    # n = 3: the path shapes have probability 4/6, the balanced one 2/6
    heights = [int(sample_bst(3, rng).depth.max()) for _ in range(6000)]
    assert np.mean(np.array(heights) == 1) == pytest.approx(1 / 3, abs=0.02)


def test_cross_sampler_bst_depth_profiles(rng):
    n, k = 10**4, 100

    def depths(f):
        return np.concatenate([f(child).depth for child in rng.spawn(k)])

    perm = depths(lambda r: sample_bst(n, r, method="insert"))
    cart = depths(lambda r: sample_bst(n, r))
    split = depths(lambda r: sample_split_tree(SplitSpec.bst(), n, r).tree)
    cmj = depths(lambda r: sample_cmj_tree(BirthSpec.bst(), n, r))
    assert ks_statistic(split, perm) <= 0.02
    assert ks_statistic(cmj, perm) <= 0.02
    assert ks_statistic(cart, perm) <= 0.02


# -- attachment and CMJ -------------------------------------------------------------


def test_pa_degree_bound(rng):
    for b in (2, 3, 5):
        t = sample_preferential_attachment(-1.0, float(b), 5000, rng)
        assert t.outdegree.max() <= b
        t = sample_preferential_attachment(-1.0, float(b), 2000, rng, method="fenwick")
        assert t.outdegree.max() <= b


def test_pa_rejects_bad_rates(rng):
    with pytest.raises(ValueError):
        sample_preferential_attachment(-1.0, 2.5, 10, rng)
    with pytest.raises(ValueError):
        sample_preferential_attachment(1.0, 0.0, 10, rng)


@pytest.mark.parametrize("chi,rho", [(0.0, 1.0), (1.0, 1.0), (1.0, 2.0), (-1.0, 3.0), (0.5, 0.7)])
def test_pa_direct_matches_fenwick(rng, chi, rho):
    n, k = 2000, 150
    a = [sample_preferential_attachment(chi, rho, n, c) for c in rng.spawn(k)]
    b = [sample_preferential_attachment(chi, rho, n, c, method="fenwick") for c in rng.spawn(k)]
    da = np.concatenate([t.depth for t in a])
    db = np.concatenate([t.depth for t in b])
    assert ks_statistic(da, db) < 0.03
    assert ks_statistic([t.outdegree[0] for t in a], [t.outdegree[0] for t in b]) < 0.2


def test_small_pa_exact_law(rng):
    # PORT with 3 vertices: vertex 2 attaches to root w.p. (1+1)/(2+1) = 2/3
    hits = np.mean([port(3, rng).parent[2] == 0 for _ in range(6000)])
    assert hits == pytest.approx(2 / 3, abs=0.02)
    hits = np.mean([rrt(3, rng).parent[2] == 0 for _ in range(6000)])
    assert hits == pytest.approx(1 / 2, abs=0.02)
    assert bary(3, 50, rng).outdegree.max() <= 3


def test_cmj_trees(rng):
    t = sample_cmj_tree(BirthSpec.yule(), 500, rng)
    assert t.n == 500
    t = sample_cmj_tree(BirthSpec.bst(), 500, rng)
    assert t.outdegree.max() <= 2
    spec = BirthSpec("renewal", gap=GapLaw("gamma", 2.0, 0.5), max_children=3)
    assert sample_cmj_tree(spec, 300, rng).outdegree.max() <= 3
    assert sample_cmj_tree(BirthSpec.linear(1.0, 1.0), 50, rng).n == 50
    with pytest.raises(Extinction):
        sample_cmj_tree(BirthSpec("renewal", gap=GapLaw("exponential"), max_children=0), 5, rng, max_restarts=3)


def test_cmj_laplace_transforms():
    assert BirthSpec.yule().laplace(1.0) == pytest.approx(1.0)
    assert BirthSpec.bst().laplace(1.0) == pytest.approx(1.0)
    assert BirthSpec.bst().laplace_slope(1.0) == pytest.approx(0.5)
    assert BirthSpec.from_dict(BirthSpec.bst().to_dict()) == BirthSpec.bst()


# -- deterministic families and models ------------------------------------------------


def test_deterministic_families():
    assert path(5).n == 5 and star(5).outdegree[0] == 4
    assert complete_bary(2, 3).n == 15 and complete_bary(3, 2).n == 13
    s = superstar({1: 2, 2: 1})
    assert s.n == 5 and sorted(s.depth) == [0, 1, 1, 1, 2]
    assert superstar([2, 1]) == s


def test_every_model_builds(rng):
    extra = {"pa": {"chi": 1, "rho": 2}, "cmj": {"birth": BirthSpec.yule().to_dict()}}
    for m in MODELS:
        spec = {"model": m, **extra.get(m, {})}
        n = 4 if m == "complete_bary" else 30
        t = make_source(spec)(n, rng)
        assert t.n >= 1
    with pytest.raises(SpecError):
        make_source({"model": "unknown"})
