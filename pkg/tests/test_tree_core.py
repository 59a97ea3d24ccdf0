import json

import numpy as np
import pytest

from treelimit import TreeError, build_tree, distance, exact_distance_distribution, exact_mean_distance
from treelimit.tree_core import (
    RootedTree,
    bfs_distances,
    check_distance_matrix,
    distances_from,
    four_point_violation,
    from_preorder_degrees,
    histogram,
    histogram_mean,
    max_outdegree_vertex,
    naive_lca,
    preorder_degrees,
    read_histogram_csv,
    rho_r,
    sample_vertices,
    validate_lukasiewicz,
    write_histogram_csv,
)
from treelimit.generators import path, star

from conftest import random_parent_tree


def test_path_depths_and_mean():
    t = path(5)
    assert list(t.depth) == [0, 1, 2, 3, 4]
    # sum over ordered pairs of |i - j| / 25 = 40 / 25
    assert exact_mean_distance(t) == pytest.approx(1.6, rel=1e-12)


def test_star_distance_pmf():
    h = exact_distance_distribution(star(5))
    assert h == pytest.approx({0: 0.2, 1: 0.32, 2: 0.48})
    assert histogram_mean(h) == pytest.approx(1.28)


def test_cherry_from_degrees():
    t = from_preorder_degrees([2, 0, 0])
    assert list(t.parent) == [-1, 0, 0]
    assert list(preorder_degrees(t)) == [2, 0, 0]


@pytest.mark.parametrize(
    "parents",
    [[], [0, 0], [-1, 2, 1], [-1, -1, 0], [-1, 5], [1, -1], [-1, 1]],
)
def test_build_tree_rejects(parents):
    with pytest.raises(TreeError):
        build_tree(parents)


@pytest.mark.parametrize("degrees", [[0, 2, 0], [1, 1], [3, 0, 0], [-1, 2, 0]])
def test_lukasiewicz_rejects(degrees):
    with pytest.raises(TreeError):
        validate_lukasiewicz(degrees)


def test_none_root_marker():
    assert build_tree([None, 0, 1]).n == 3


def test_lca_and_distances_match_bfs(rng):
    for _ in range(30):
        n = int(rng.integers(1, 120))
        t = random_parent_tree(n, rng)
        src = int(rng.integers(n))
        ref = bfs_distances(t, src)
        assert np.array_equal(distances_from(t, src), ref)
        vs = np.arange(n)
        assert np.array_equal(t.lca_index.distances(np.full(n, src), vs), ref)
        assert np.array_equal(t.pair_distances(np.full(3, src), vs[:3]), ref[:3])
        for v in rng.integers(0, n, 5):
            assert t.lca_index.lca(src, int(v)) == naive_lca(t, src, int(v))
            assert distance(t.lca_index, src, int(v)) == ref[v]


def test_exact_mean_agrees_with_distribution(rng):
    for _ in range(20):
        t = random_parent_tree(int(rng.integers(1, 200)), rng)
        h = exact_distance_distribution(t)
        assert sum(h.values()) == pytest.approx(1.0, abs=1e-12)
        assert histogram_mean(h) == pytest.approx(exact_mean_distance(t), rel=1e-12)


def test_exact_distribution_guard():
    with pytest.raises(ValueError):
        exact_distance_distribution(path(10), max_n=5)


def test_json_roundtrip(rng):
    t = random_parent_tree(50, rng)
    back = RootedTree.from_json(t.to_json())
    assert back == t
    with pytest.raises(TreeError):
        RootedTree.from_json(json.dumps({"n": 3, "parent": [-1, 0]}))


def test_tree_arrays_read_only():
    t = path(4)
    with pytest.raises(ValueError):
        t.parent[1] = 0


def test_rho_r_properties(rng):
    t = random_parent_tree(300, rng)
    for _ in range(50):
        m = rho_r(t, sample_vertices(t, 6, rng), scale=0.5)
        check_distance_matrix(m)
    assert rho_r(t, [3]).shape == (1, 1)
    with pytest.raises(ValueError):
        sample_vertices(t, 0, rng)


def test_distance_matrix_checks():
    bad = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], float)
    with pytest.raises(AssertionError):
        check_distance_matrix(bad)
    # four points on a cycle of length 4 are not a tree metric
    cyc = np.array([[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]], float)
    assert four_point_violation(cyc) > 0


def test_max_outdegree_tie_break():
    # root has 2 children, vertices 1 and 2 also have 2 each; root wins in preorder
    t = build_tree([-1, 0, 0, 1, 1, 2, 2])
    assert max_outdegree_vertex(t) == (0, 2)


def test_histogram_csv_roundtrip(tmp_path):
    h = histogram([1, 1, 2, 5])
    write_histogram_csv(h, tmp_path / "h.csv")
    assert read_histogram_csv(tmp_path / "h.csv") == pytest.approx(h)


def test_non_monotone_labels_build(rng):
    t = build_tree([-1, 2, 0, 1])
    assert list(t.depth) == [0, 2, 1, 3]
    assert list(t.subtree_size) == [4, 2, 3, 1]
