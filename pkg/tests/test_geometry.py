import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import linprog
from scipy.spatial.distance import pdist

from lebesgue_lab import geometry as G


def lp_origin_in_hull(ps):
    """Independent oracle: feasibility of sum(l_i p_i) = 0, sum(l_i) = 1, l >= 0."""
    m, n = ps.shape
    a_eq = np.vstack([ps.T, np.ones(m)])
    res = linprog(np.zeros(m), A_eq=a_eq, b_eq=np.r_[np.zeros(n), 1.0], bounds=[(0, None)] * m,
                  method="highs")
    return res.status == 0


def unit(rng, m, n):
    p = rng.standard_normal((m, n))
    return p / np.linalg.norm(p, axis=1, keepdims=True)


@pytest.mark.parametrize("n", range(1, 9))
def test_simplex_vertices_gram(n):
    v = G.simplex_vertices(n)
    assert v.shape == (n + 1, n)
    gram = v @ v.T
    expect = np.full((n + 1, n + 1), -1.0 / n)
    np.fill_diagonal(expect, 1.0)
    np.testing.assert_allclose(gram, expect, atol=1e-12)
    np.testing.assert_allclose(v.sum(axis=0), 0, atol=1e-12)


@pytest.mark.parametrize("n", range(1, 9))
def test_simplex_diameter_matches_vertices(n):
    assert G.simplex_diameter(n) == pytest.approx(math.sqrt(2 + 2 / n), abs=1e-15)
    assert G.diameter(G.simplex_vertices(n)) == pytest.approx(G.simplex_diameter(n), abs=1e-12)


def test_simplex_diameter_decreasing():
    d = [G.simplex_diameter(n) for n in range(1, 9)]
    assert all(a > b for a, b in zip(d, d[1:]))


def test_known_simplex_values():
    assert G.simplex_diameter(2) == pytest.approx(math.sqrt(3), abs=1e-15)
    assert G.simplex_diameter(3) == pytest.approx(math.sqrt(8 / 3), abs=1e-15)


def test_diameter_small_examples():
    assert G.diameter([[0, 0], [3, 4]]) == 5.0
    assert G.diameter([[1.0, 2.0]]) == 0.0
    with pytest.raises(ValueError):
        G.diameter(np.zeros((0, 2)))


@given(arrays(np.float64, st.tuples(st.integers(1, 40), st.integers(1, 4)),
              elements=st.floats(-10, 10, allow_nan=False)))
def test_diameter_matches_pdist(pts):
    expect = pdist(pts).max() if len(pts) > 1 else 0.0
    assert G.diameter(pts) == pytest.approx(expect, abs=1e-12)


@pytest.mark.parametrize("m,n", [(5000, 2), (6000, 3)])
def test_point_cloud_diameter_large(rng, m, n):
    pts = unit(rng, m, n) * rng.uniform(0.99, 1.0, (m, 1))
    block = max(np.max(np.linalg.norm(pts[i:i + 500, None] - pts[None], axis=2)) for i in range(0, m, 500))
    assert G.point_cloud_diameter(pts) == pytest.approx(block, abs=1e-12)


def test_diameter_pair_indices():
    pts = np.array([[0.0, 0], [1, 0], [0.2, 3]])
    d, i, j = G.diameter_pair(pts)
    assert {i, j} == {1, 2}
    assert d == pytest.approx(np.linalg.norm(pts[1] - pts[2]))


def test_origin_in_hull_examples():
    assert G.origin_in_hull(G.simplex_vertices(2))
    assert not G.origin_in_hull([[1, 0], [0, 1]])
    assert G.origin_in_hull([[1, 0], [-1, 0]])


@pytest.mark.parametrize("seed", range(10))
def test_origin_in_hull_matches_lp(seed):
    rng = np.random.default_rng(seed)
    for _ in range(30):
        n = int(rng.integers(2, 5))
        m = int(rng.integers(1, 9))
        ps = unit(rng, m, n)
        status = G.hemisphere_status(ps)
        if status.degenerate:
            continue
        assert G.origin_in_hull(ps) == lp_origin_in_hull(ps)


def test_open_hemisphere_witness_examples():
    u = G.open_hemisphere_witness([[1, 0], [0, 1]])
    np.testing.assert_allclose(u, [math.sqrt(0.5)] * 2, atol=1e-12)
    assert G.open_hemisphere_witness(G.simplex_vertices(3)) is None
    status = G.hemisphere_status(G.simplex_vertices(3))
    assert status.margin == pytest.approx(-1 / 3, abs=1e-12)


def test_witness_is_valid(rng):
    for _ in range(200):
        n = int(rng.integers(2, 5))
        ps = unit(rng, int(rng.integers(1, 8)), n)
        u = G.open_hemisphere_witness(ps)
        if u is not None:
            assert np.all(ps @ u > 0)
            assert np.linalg.norm(u) == pytest.approx(1.0)


def test_hemisphere_requires_unit_points():
    with pytest.raises(ValueError):
        G.hemisphere_status([[2.0, 0.0], [0.0, 1.0]])


def test_min_norm_point_segment():
    z = G.min_norm_point([[1.0, 1.0], [1.0, -1.0]])
    np.testing.assert_allclose(z, [1.0, 0.0], atol=1e-12)


@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.just(3)), elements=st.floats(-5, 5)))
def test_min_norm_point_is_optimal(ps):
    z = G.min_norm_point(ps)
    # first-order optimality on the hull: <z, p - z> >= 0 for every vertex
    assert np.all(ps @ z - z @ z >= -1e-7 * max(1.0, np.abs(ps).max() ** 2))


def test_box_distance():
    assert G.box_distance([[2.0, 0.5]], [0, 0], [1, 1])[0] == pytest.approx(1.0)
    assert G.box_distance([[0.5, 0.5]], [0, 0], [1, 1])[0] == 0.0
    assert G.box_distance([[2.0, 2.0]], [0, 0], [1, 1])[0] == pytest.approx(math.sqrt(2))


def test_distance_to_polyhedral_set():
    cells = [([0.5, 0.0], [0.5, 1.0]), ([0.0, 0.25], [1.0, 0.25])]
    assert G.distance_to_polyhedral_set([0.2, 0.8], cells) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        G.distance_to_polyhedral_set([0.2, 0.8, 0.1], cells)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_unit_sphere_samples(n):
    s = G.unit_sphere_samples(n, 500, np.random.default_rng(0))
    assert s.shape == (500, n)
    np.testing.assert_allclose(np.linalg.norm(s, axis=1), 1.0, atol=1e-12)
