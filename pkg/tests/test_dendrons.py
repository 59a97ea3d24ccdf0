import math

import numpy as np
import pytest

from treelimit.analysis import ks_null_quantile, ks_statistic
from treelimit.dendrons import (
    ExcursionDendron,
    ExcursionTree,
    IntervalDendron,
    PointDendron,
    crt_dendron,
    dendron_from_dict,
    excursion_distance,
    pair_distance,
    refinement_pair_samples,
    rho_r_dendron,
    sample_brownian_bridge,
    sample_brownian_excursion,
    vervaat,
)
from treelimit.tree_core import check_distance_matrix, four_point_violation

TRIANGLE = 1 - np.abs(2 * np.linspace(0, 1, 9) - 1)


def test_dirac_point_dendron(rng):
    d = PointDendron.dirac(1.0)
    assert pair_distance(d, rng) == 2.0
    m = rho_r_dendron(d, 5, rng)
    off = ~np.eye(5, dtype=bool)
    assert np.all(m[off] == 2.0) and np.all(np.diag(m) == 0)
    assert np.all(rho_r_dendron(d, 1, rng) == 0)


def test_geometric_point_dendron(rng):
    x = PointDendron.geometric1(0.5).pair_distances(200000, rng)
    assert x.min() == 2
    assert np.mean(x == 2) == pytest.approx(0.25, abs=0.005)
    assert x.mean() == pytest.approx(4.0, abs=0.02)


def test_point_dendron_additive_form(rng):
    d = PointDendron.geometric1(0.3)
    for _ in range(200):
        m = rho_r_dendron(d, 5, rng)
        # x_i = (a_ij + a_ik - a_jk)/2 must not depend on j, k
        for i in range(5):
            others = [j for j in range(5) if j != i]
            vals = {0.5 * (m[i, j] + m[i, k] - m[j, k]) for j in others for k in others if j != k}
            assert len(vals) == 1
        check_distance_matrix(m)


def test_empirical_point_dendron(rng):
    d = PointDendron.empirical([0.0, 1.0])
    x = d.pair_distances(10000, rng)
    assert set(np.unique(x)) <= {0.0, 1.0, 2.0}


def test_interval_mean(rng):
    x = IntervalDendron(1.0).pair_distances(10**6, rng)
    assert x.mean() == pytest.approx(1 / 3, abs=0.002)
    assert IntervalDendron(2.0).pair_distances(10**5, rng).mean() == pytest.approx(2 / 3, abs=0.01)


def test_triangle_excursion():
    tri = ExcursionTree(TRIANGLE)
    assert excursion_distance(tri, 0.25, 0.75) == 0.0
    assert excursion_distance(tri, 0.0, 0.5) == 1.0
    assert excursion_distance(tri, 0.5, 0.0) == 1.0
    assert excursion_distance(tri, 0.3, 0.3) == 0.0


@pytest.mark.parametrize("values", [[0, 1], [1, 0, 0], [0, -1, 0], [0, 1, 1]])
def test_excursion_validation(values):
    with pytest.raises(ValueError):
        ExcursionTree(values)


def test_brownian_excursion_invariants(rng):
    for m in (2, 16, 1024):
        g = sample_brownian_excursion(m, rng).values
        assert g.size == m + 1
        assert g[0] == 0 and g[-1] == 0 and g.min() == 0


def test_vervaat_shift(rng):
    b = sample_brownian_bridge(64, rng)
    e, k = vervaat(b)
    assert np.allclose(e[:64], np.roll(b[:64], -k) - b[k])
    assert e.min() == 0.0


def test_excursion_pseudometric(rng):
    tree = sample_brownian_excursion(4096, rng)
    s, t, u = rng.integers(0, 4097, size=(3, 10**5))
    dst = tree.index_distances(s, t)
    assert np.array_equal(dst, tree.index_distances(t, s))
    assert np.all(dst <= tree.index_distances(s, u) + tree.index_distances(u, t) + 1e-12)
    # small batches take the slice route; both routes must agree
    fresh = ExcursionTree(tree.values)
    assert fresh.index_distances(s[:3], t[:3]) == pytest.approx(dst[:3], abs=1e-12)


def test_excursion_max_mean(rng):
    mx = [sample_brownian_excursion(2**12, rng).values.max() for _ in range(4000)]
    se = np.std(mx) / math.sqrt(len(mx))
    # sqrt(pi/2) minus a small discretization bias
    assert np.mean(mx) == pytest.approx(math.sqrt(math.pi / 2), abs=4 * se + 0.02)


def test_crt_scaling_with_shared_excursion(rng):
    e = sample_brownian_excursion(1024, rng)
    d1 = crt_dendron(1.0, excursion=e)
    d2 = crt_dendron(2.0, excursion=e)
    pts = d1.sample_points(100, rng)
    assert np.allclose(d2.distance_matrix(pts), 0.5 * d1.distance_matrix(pts))
    with pytest.raises(ValueError):
        crt_dendron(0.0, excursion=e)


def test_crt_four_point(rng):
    for _ in range(50):
        d = crt_dendron(1.0, 1024, rng)
        m = rho_r_dendron(d, 6, rng)
        check_distance_matrix(m, atol=1e-9)
        assert four_point_violation(m) <= 1e-9


def test_refinement_consistency(rng):
    gaps = []
    for m in (2**8, 2**14):
        fine, coarse = refinement_pair_samples(m, 100, 20, np.random.default_rng(3))
        gaps.append(ks_statistic(fine, coarse))
    assert gaps[1] < gaps[0]
    assert gaps[1] <= 0.02


def test_restriction_consistency(rng):
    # entry (1,2) of a rho_5 draw has the law of a rho_2 draw
    d = PointDendron.geometric1(0.4)
    a = np.array([rho_r_dendron(d, 5, rng)[0, 1] for _ in range(4000)])
    b = np.array([rho_r_dendron(d, 2, rng)[0, 1] for _ in range(4000)])
    assert ks_statistic(a, b) <= ks_null_quantile(4000, 4000, 0.999)


def test_dendron_json_specs(rng):
    d = dendron_from_dict({"kind": "point", "nu": {"kind": "geometric1", "q": 0.4447}})
    assert d.to_dict() == {"kind": "point", "nu": {"kind": "geometric1", "q": 0.4447}}
    assert isinstance(dendron_from_dict({"kind": "interval", "length": 1}), IntervalDendron)
    crt = dendron_from_dict({"kind": "crt", "sigma": 1, "m": 256}, rng)
    assert isinstance(crt, ExcursionDendron) and crt.to_dict()["m"] == 256
    with pytest.raises(ValueError):
        dendron_from_dict({"kind": "blob"})
    with pytest.raises(ValueError):
        PointDendron("lognormal", {})


def test_excursion_csv_roundtrip(tmp_path, rng):
    e = sample_brownian_excursion(64, rng)
    e.write_csv(tmp_path / "g.csv")
    back = ExcursionTree.read_csv(tmp_path / "g.csv")
    assert np.array_equal(back.values, e.values)
