"""Exact polytope layer: hulls, volumes, facet measures, clipping,
lattice enumeration, and invariance under unimodular changes of basis.

Scalar expectations are either hand-derived (unit square, segment) or
cross-checked against independent shoelace / lattice-length oracles.
"""

import json
import random
from fractions import Fraction

import pytest

import oracles
import support
from toricmu import (
    EMPTY,
    DegenerateHull,
    build_polytope,
    polytope_from_json,
    triangulate,
)


def verts(P):
    return sorted(tuple(v.coords) for v in P.vertices)


def test_hull_drops_redundant_points():
    P = build_polytope(
        [(0, 0), (1, 0), (1, 1), (0, 1), (Fraction(1, 2), Fraction(1, 2)), (1, Fraction(1, 2))]
    )
    assert verts(P) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert P.dim == 2


def test_degenerate_inputs_raise():
    with pytest.raises(DegenerateHull):
        build_polytope([(0, 0), (1, 1), (2, 2)])
    with pytest.raises(DegenerateHull):
        build_polytope([(0, 0), (0, 0)])


def test_unit_square_exact_data():
    P = support.unit_square()
    assert P.volume() == 1
    assert P.boundary_measure() == 4
    assert tuple(P.barycenter().coords) == (Fraction(1, 2), Fraction(1, 2))
    assert sorted(P.facet_measure(i) for i in range(len(P.facets))) == [1, 1, 1, 1]
    assert all(cone.index == 1 for cone in P.vertex_cones)
    assert P.nonsimple_vertices == ()


def test_segment_data():
    P = support.unit_segment()
    assert P.dim == 1
    assert P.volume() == 1
    assert P.boundary_measure() == 2
    assert len(P.facets) == 2


def test_blowup_pentagon_exact_data():
    P = support.blowup_polytope()
    assert len(P.vertices) == 5
    assert P.volume() == Fraction(7, 2)
    assert P.boundary_measure() == 7
    hull = oracles.hull_ccw(verts(P))
    assert P.volume() == oracles.shoelace_area(hull)
    assert P.boundary_measure() == oracles.polygon_boundary_measure(hull)


def test_donaldson_polygon_exact_data():
    P = support.donaldson_polytope()
    assert len(P.vertices) == 9
    assert P.volume() == Fraction(71, 10)
    assert P.boundary_measure() == Fraction(33, 5)
    hull = oracles.hull_ccw(verts(P))
    assert P.volume() == oracles.shoelace_area(hull)
    assert P.boundary_measure() == oracles.polygon_boundary_measure(hull)
    # Orbifold indices of the vertex cones: 3 at each of the six cut
    # corners, 40 at each of the three shallow-slice vertices.
    assert sorted(c.index for c in P.vertex_cones) == [3] * 6 + [40] * 3
    assert P.nonsimple_vertices == ()


def test_random_polytopes_match_shoelace(subtests=None):
    rng = random.Random(31415)
    for _ in range(40):
        P = support.random_polytope(rng)
        hull = oracles.hull_ccw(verts(P))
        assert P.volume() == oracles.shoelace_area(hull)
        assert P.boundary_measure() == oracles.polygon_boundary_measure(hull)
        assert sum(P.facet_measure(i) for i in range(len(P.facets))) == (
            P.boundary_measure()
        )


def test_facets_support_their_vertices():
    rng = random.Random(7)
    for _ in range(20):
        P = support.random_polytope(rng)
        for f in P.facets:
            for i, v in enumerate(P.vertices):
                val = sum(Fraction(n) * c for n, c in zip(f.normal, v.coords))
                if i in f.vertex_indices:
                    assert val == f.offset
                else:
                    assert val < f.offset


def test_contains():
    P = support.unit_square()
    assert P.contains((Fraction(1, 2), Fraction(1, 2)))
    assert P.contains((0, 0))
    assert not P.contains((0, 0), strict=True)
    assert not P.contains((2, 0))


def test_clip_cases():
    P = support.unit_square()
    tri = P.clip((1, 1), 1)
    assert tri.volume() == Fraction(1, 2)
    assert verts(tri) == [(0, 0), (0, 1), (1, 0)]
    assert P.clip((1, 0), -1) is EMPTY
    assert P.clip((1, 1), 0) is EMPTY  # touches only a corner
    same = P.clip((1, 0), 5)
    assert same.volume() == 1 and len(same.vertices) == 4


def test_triangulation_volumes_sum():
    rng = random.Random(5150)
    for _ in range(15):
        P = support.random_polytope(rng)
        pieces = triangulate(P)
        assert sum(s.normalized_volume() for s in pieces) == P.volume()
        for s in pieces:
            assert s.normalized_volume() == abs(s.edge_matrix_det()) / 2


def test_lattice_points_small_cases():
    square = support.unit_square()
    assert sorted(square.lattice_points()) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert len(square.lattice_points(scale=2)) == 9
    seg = support.unit_segment()
    assert sorted(seg.lattice_points(scale=3)) == [(0,), (1,), (2,), (3,)]


def test_blowup_ehrhart_counts():
    # P = {-1 <= x, y <= 1, x + y <= 1}: hand enumeration gives 8 points,
    # and Ehrhart vol*t^2 + (bnd/2)*t + 1 gives 22 and 43 at t = 2, 3.
    P = support.blowup_polytope()
    ineqs = [((-1, 0), 1), ((1, 0), 1), ((0, -1), 1), ((0, 1), 1), ((1, 1), 1)]
    for scale, expected in ((1, 8), (2, 22), (3, 43)):
        pts = P.lattice_points(scale=scale)
        assert len(pts) == expected
        assert len(set(pts)) == expected
        assert oracles.brute_lattice_count(ineqs, (-3 * scale, 3 * scale), scale) == (
            expected
        )


def test_lattice_points_match_facet_inequalities():
    rng = random.Random(777)
    for _ in range(8):
        P = support.random_polytope(rng)
        ineqs = [(f.normal, f.offset) for f in P.facets]
        span = 1 + max(
            int(abs(c)) for v in P.vertices for c in v.coords
        )
        expected = oracles.brute_lattice_count(ineqs, (-2 * span, 2 * span), 2)
        assert len(P.lattice_points(scale=2)) == expected


def unimodular_image(P, mat, shift):
    pts = []
    for v in P.vertices:
        x, y = v.coords
        pts.append(
            (
                mat[0][0] * x + mat[0][1] * y + shift[0],
                mat[1][0] * x + mat[1][1] * y + shift[1],
            )
        )
    return build_polytope(pts)


@pytest.mark.parametrize(
    "mat", [((1, 1), (0, 1)), ((0, -1), (1, 0)), ((2, 1), (1, 1)), ((1, 0), (-3, 1))]
)
def test_unimodular_invariance(mat):
    rng = random.Random(sum(map(abs, mat[0] + mat[1])))
    for _ in range(6):
        P = support.random_polytope(rng)
        Q = unimodular_image(P, mat, (3, -2))
        assert Q.volume() == P.volume()
        assert Q.boundary_measure() == P.boundary_measure()
        assert len(Q.lattice_points(scale=2)) == len(P.lattice_points(scale=2))
        assert sorted(c.index for c in Q.vertex_cones) == sorted(
            c.index for c in P.vertex_cones
        )


def test_facet_chart_measures():
    P = support.blowup_polytope()
    for i in range(len(P.facets)):
        sub, origin, basis = P.facet_polytope(i)
        assert sub.dim == 1
        assert sub.volume() == P.facet_measure(i)
        # chart really parametrizes the facet: origin + basis @ y hits vertices
        f = P.facets[i]
        chart_points = set()
        for y in sub.vertices:
            pt = tuple(
                o + sum(b[k] * yc for k, yc in enumerate(y.coords))
                for o, b in zip(origin.coords, zip(*basis))
            )
            chart_points.add(pt)
        facet_vertices = {tuple(P.vertices[j].coords) for j in f.vertex_indices}
        assert chart_points == facet_vertices


def test_json_round_trip():
    P = support.donaldson_polytope()
    text = P.to_json()
    data = json.loads(text)
    assert "vertices" in data
    Q = polytope_from_json(text)
    assert verts(Q) == verts(P)
    assert Q.volume() == P.volume()
    assert Q.boundary_measure() == P.boundary_measure()


def test_json_dim_field_is_optional():
    bare = json.dumps({"vertices": [["-1/2", 0], [1, 0], [0, 1]]})
    Q = polytope_from_json(bare)
    assert Q.dim == 2
    assert Q.volume() == Fraction(3, 4)
    with pytest.raises(ValueError):
        polytope_from_json(json.dumps({"dim": 3, "vertices": [[0, 0], [1, 0], [0, 1]]}))
