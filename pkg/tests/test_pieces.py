import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.spatial import Delaunay
from shapely.geometry import Point, Polygon, box

from lebesgue_lab.constructions import build_hex_prism, build_pancakes, pancake_profile
from lebesgue_lab.geometry import simplex_vertices
from lebesgue_lab.pieces import (BOUNDARY, EXTERIOR, INTERIOR, Brick, DiskAnnulus, GridCell, HexPrism,
                                 PancakeLayer, Piece, Shell, SimplexCore, SimplexWingCell)

coord = st.floats(-2, 3, allow_nan=False)


@given(st.tuples(coord, coord))
def test_box_sdf_exterior_matches_shapely(xy):
    cell = GridCell(id=0, lo=[0.0, 0.0], hi=[0.5, 0.25])
    s = cell.sdf(np.array([xy]))[0]
    shp = box(0, 0, 0.5, 0.25)
    p = Point(xy)
    expect = shp.exterior.distance(p)
    if shp.contains(p):
        expect = -expect
    assert s == pytest.approx(expect, abs=1e-12)


def test_classify_and_contains():
    cell = GridCell(id=0, lo=[0, 0], hi=[1, 1])
    pts = np.array([[0.5, 0.5], [1.0, 0.3], [1.5, 0.5]])
    assert list(cell.classify(pts)) == [INTERIOR, BOUNDARY, EXTERIOR]
    assert list(cell.contains(pts)) == [True, True, False]


def test_ball_clipped_cell():
    cell = GridCell(id=0, lo=[0, 0], hi=[1, 1], clip="ball")
    assert cell.contains([[0.5, 0.5]])[0]
    assert not cell.contains([[0.9, 0.9]])[0]


@given(st.tuples(coord, coord))
def test_annulus_sdf(xy):
    ring = DiskAnnulus(id=0, center=[0.0, 0.0], r_inner=1.0, r_outer=2.0)
    r = math.hypot(*xy)
    assert ring.sdf(np.array([xy]))[0] == pytest.approx(max(1.0 - r, r - 2.0), abs=1e-12)


def test_unbounded_band_and_shell():
    out = DiskAnnulus(id=0, center=[0.0, 0.0], r_inner=3.0, r_outer=None)
    assert out.contains([[10.0, 0.0]])[0] and not out.contains([[1.0, 0.0]])[0]
    sh = Shell(id=0, center=[0.0, 0.0, 0.0], r_inner=1.0, r_outer=2.0)
    assert sh.sdf([[0.0, 0.0, 1.5]])[0] == pytest.approx(-0.5)


@pytest.mark.parametrize("piece", [
    GridCell(id=3, lo=[0, 0], hi=[0.5, 0.5], analytic_diameter=math.sqrt(0.5)),
    Brick(id=1, lo=[0.25, 0], hi=[0.75, 0.25]),
    DiskAnnulus(id=2, center=[0, 0], r_inner=1.0, r_outer=2.0, partial=False),
    SimplexCore(id=0, n=3, t=1.01),
    SimplexWingCell(id=4, n=3, t=1.01, face=2),
    HexPrism(id=5, polygon=[[0, 0], [1, 0], [0.5, 0.8]], z_lo=0.0, z_hi=0.5),
    PancakeLayer(id=6, index=2, profile=pancake_profile()),
])
def test_round_trip(piece, rng):
    back = Piece.from_dict(piece.to_dict())
    assert type(back) is type(piece)
    assert back.to_dict() == piece.to_dict()
    x = rng.uniform(-2, 2, (200, piece.dim()))
    np.testing.assert_array_equal(back.sdf(x), piece.sdf(x))


def test_unknown_kind():
    with pytest.raises(ValueError):
        Piece.from_dict({"id": 0, "kind": "blob", "params": {}})


def test_rescaled(rng):
    cell = GridCell(id=0, lo=[0, 0], hi=[1, 1], analytic_diameter=math.sqrt(2))
    big = cell.rescaled(0.5)
    x = rng.uniform(-1, 2, (100, 2))
    np.testing.assert_allclose(big.sdf(x * 0.5), 0.5 * cell.sdf(x), atol=1e-14)
    assert big.analytic_diameter == pytest.approx(math.sqrt(2) / 2)


@pytest.mark.parametrize("n,t", [(2, 1.0), (2, 1.5), (3, 1.01), (3, 1.3), (4, 1.2)])
def test_simplex_pieces_match_geometric_definition(n, t, rng):
    """Core = scaled simplex within the ball; wing j = rest of the ball where face j is the lowest."""
    v = simplex_vertices(n)
    tri = Delaunay(t * v)
    x = rng.standard_normal((20000, n))
    x *= (rng.random(20000) ** (1 / n) / np.linalg.norm(x, axis=1))[:, None]
    in_simplex = tri.find_simplex(x) >= 0
    core = SimplexCore(id=0, n=n, t=t)
    np.testing.assert_array_equal(core.contains(x), in_simplex)
    lowest = np.argmin(x @ v.T, axis=1)
    for j in range(n + 1):
        wing = SimplexWingCell(id=j + 1, n=n, t=t, face=j)
        s = wing.sdf(x)
        expect = ~in_simplex & (lowest == j)
        assert np.all(s[expect] <= 1e-12)
        assert np.all(s[~expect] >= -1e-12)


def test_hex_prism_matches_shapely(rng):
    poly = [[0, 0], [0.4, -0.1], [0.7, 0.3], [0.4, 0.8], [-0.1, 0.5]]
    prism = HexPrism(id=0, polygon=poly, z_lo=0.2, z_hi=0.9)
    shp = Polygon(poly)
    x = rng.uniform(-0.5, 1.0, (3000, 3))
    inside = np.array([shp.contains(Point(p[:2])) for p in x]) & (x[:, 2] > 0.2) & (x[:, 2] < 0.9)
    s = prism.sdf(x)
    assert np.all((s < 0) == inside)
    flat = HexPrism(id=0, polygon=poly, z_lo=0.0, z_hi=0.0)
    assert flat.exact_diameter() == pytest.approx(max(
        math.dist(a, b) for a in poly for b in poly), abs=1e-12)


def test_hex_prism_clockwise_input_is_reoriented():
    cw = HexPrism(id=0, polygon=[[0, 0], [0, 1], [1, 1], [1, 0]])
    assert cw.contains([[0.5, 0.5, 0.5]])[0]


def test_pancake_profile_validation():
    with pytest.raises(ValueError):
        pancake_profile(w=2.0)
    with pytest.raises(ValueError):
        pancake_profile(heights=[0.5, -0.1, 0.5, 0.5, 0.5])


def test_pancake_layers_nest_and_coincide_on_caps():
    prof = pancake_profile()
    psi = np.linspace(0, math.pi, 2001)
    for k in range(1, prof.layers + 1):
        assert np.all(prof.rho(k, psi) >= prof.rho(k - 1, psi))
        cap = prof.cap_angle(k, psi) <= prof.w
        np.testing.assert_allclose(prof.rho(k, psi)[cap], prof.rho(k - 1, psi)[cap], atol=1e-15)
        assert np.all(prof.rho(k, psi)[~cap] > prof.rho(k - 1, psi)[~cap])


def test_pancake_outlines_close():
    d = build_pancakes()
    for p in d.pieces:
        for loop in p.outline_2d(((-4, -4), (4, 4))):
            assert loop.shape[1] == 2 and len(loop) >= 4


def test_pancake_3d_membership():
    d = build_pancakes(n=3, m=3)
    s = d.sdf_matrix(np.array([[0.0, 0.0, 0.5], [0.0, 0.0, -3.9]]))
    assert s[0, 0] < 0
    assert s[1, -1] < 0


def test_hex_builder_pieces_are_convex_prisms():
    d = build_hex_prism()
    for p in d.pieces:
        assert Polygon(p.polygon).is_valid
        assert Polygon(p.polygon).convex_hull.area == pytest.approx(Polygon(p.polygon).area)
