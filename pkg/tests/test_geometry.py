import numpy as np
from fractions import Fraction
from hypothesis import given, settings, strategies as st

from divdelaunay.geometry import (all_colinear, convex_hull, orient, orient_many, point_in_convex_polygon,
                                  point_in_triangle, segments_conflict)

from oracles import F, hull_edges, orient_exact, segment_intersection

coord = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
small = st.integers(0, 4).map(float)
point = st.tuples(coord, coord)
lattice_pt = st.tuples(small, small)


@given(point, point, point)
def test_orient_matches_rationals(a, b, c):
    assert orient(a, b, c) == orient_exact(a, b, c)


@given(lattice_pt, lattice_pt, lattice_pt)
def test_orient_on_lattice_degeneracies(a, b, c):
    assert orient(a, b, c) == orient_exact(a, b, c)
    assert orient(a, b, c) == -orient(b, a, c) == orient(b, c, a)


def test_orient_tiny_scale():
    s = 2.0 ** -996  # about 1.5e-300, so multiples stay exact
    a, b = (0.0, 0.0), (3 * s, 1 * s)
    assert orient(a, b, (9 * s, 3 * s)) == 0
    up, down = np.nextafter(3 * s, 1.0), np.nextafter(3 * s, 0.0)
    assert orient(a, b, (9 * s, up)) == 1
    assert orient(a, b, (9 * s, down)) == -1
    for c in [(1e-300, 3e-301), (7e-300, 2.3e-300), (-5e-301, 1e-299)]:
        assert orient(a, b, c) == orient_exact(a, b, c)


def test_orient_many_near_colinear():
    rng = np.random.default_rng(3)
    a = rng.uniform(-1, 1, (500, 2))
    b = rng.uniform(-1, 1, (500, 2))
    t = rng.uniform(-2, 2, (500, 1))
    c = a + t * (b - a)  # colinear up to rounding
    got = orient_many(a, b, c)
    assert [int(g) for g in got] == [orient_exact(*abc) for abc in zip(a, b, c)]


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_hull_equals_brute_force(seed):
    pts = np.random.default_rng(seed).uniform(0, 1, (50, 2))
    assert convex_hull(pts).edges() == hull_edges(pts)


@given(st.lists(lattice_pt, min_size=3, max_size=12, unique=True))
def test_hull_with_colinear_boundary_sites(pts):
    pts = np.array(pts)
    h = convex_hull(pts)
    if all_colinear(pts):
        assert h.degenerate and len(h.edges()) == len(pts) - 1
    else:
        assert h.edges() == hull_edges(pts)
        w = h.boundary  # clockwise
        assert all(orient(pts[w[k]], pts[w[(k + 1) % len(w)]], pts[w[(k + 2) % len(w)]]) <= 0
                   for k in range(len(w)))


def _conflict_oracle(p1, p2, q1, q2):
    hit = segment_intersection(p1, p2, q1, q2)
    if hit is not None:
        t, _ = hit
        x = (F(p1[0]) + t * (F(p2[0]) - F(p1[0])), F(p1[1]) + t * (F(p2[1]) - F(p1[1])))
        ends_p = {(F(p1[0]), F(p1[1])), (F(p2[0]), F(p2[1]))}
        ends_q = {(F(q1[0]), F(q1[1])), (F(q2[0]), F(q2[1]))}
        return not (x in ends_p and x in ends_q)
    if orient_exact(p1, p2, q1) != 0 or orient_exact(p1, p2, q2) != 0:
        return False  # parallel, or meeting outside one of the segments
    d = (F(p2[0]) - F(p1[0]), F(p2[1]) - F(p1[1]))

    def proj(q):
        return (F(q[0]) - F(p1[0])) * d[0] + (F(q[1]) - F(p1[1])) * d[1]

    a, b = sorted((Fraction(0), proj(p2)))
    c, e = sorted((proj(q1), proj(q2)))
    return min(b, e) - max(a, c) > 0


@given(lattice_pt, lattice_pt, lattice_pt, lattice_pt)
def test_segments_conflict_lattice(p1, p2, q1, q2):
    if p1 == p2 or q1 == q2:
        return
    assert segments_conflict(p1, p2, q1, q2) == _conflict_oracle(p1, p2, q1, q2)


def test_segments_conflict_random():
    rng = np.random.default_rng(11)
    for p1, p2, q1, q2 in rng.uniform(0, 1, (10_000, 4, 2)):
        assert segments_conflict(p1, p2, q1, q2) == _conflict_oracle(p1, p2, q1, q2)


def test_point_in_triangle_classes():
    a, b, c = (0, 0), (4, 0), (0, 4)
    assert point_in_triangle((1, 1), a, b, c) == "inside"
    assert point_in_triangle((1, 1), a, c, b) == "inside"
    assert point_in_triangle((2, 2), a, b, c) == "boundary"
    assert point_in_triangle((3, 3), a, b, c) == "outside"
    assert point_in_triangle((0, 0), a, b, c) == "boundary"


@given(lattice_pt)
def test_point_in_square(p):
    sq = [(1, 1), (3, 1), (3, 3), (1, 3)]
    inside = 1 < p[0] < 3 and 1 < p[1] < 3
    on = (1 <= p[0] <= 3 and 1 <= p[1] <= 3) and not inside
    want = "inside" if inside else "boundary" if on else "outside"
    assert point_in_convex_polygon(p, sq) == want
    assert point_in_convex_polygon(p, sq[::-1]) == want
