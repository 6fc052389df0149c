"""Brute-force references used by the tests. Slow, exact, and deliberately naive."""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from divdelaunay.dual import DualFace, DualTriangulation
from divdelaunay.sites import SiteSet


def F(x) -> Fraction:
    return Fraction(float(x))


def orient_exact(a, b, c) -> int:
    det = (F(b[0]) - F(a[0])) * (F(c[1]) - F(a[1])) - (F(b[1]) - F(a[1])) * (F(c[0]) - F(a[0]))
    return (det > 0) - (det < 0)


def incircle_exact(a, b, c, p) -> int:
    """>0 if p is strictly inside the circle through a, b, c (any orientation)."""
    rows = []
    for q in (a, b, c):
        dx, dy = F(q[0]) - F(p[0]), F(q[1]) - F(p[1])
        rows.append((dx, dy, dx * dx + dy * dy))
    (a1, a2, a3), (b1, b2, b3), (c1, c2, c3) = rows
    det = a1 * (b2 * c3 - b3 * c2) - a2 * (b1 * c3 - b3 * c1) + a3 * (b1 * c2 - b2 * c1)
    s = (det > 0) - (det < 0)
    return s * orient_exact(a, b, c)


def hull_edges(pts) -> set[tuple[int, int]]:
    """Pairs with every other point on one closed side and none strictly between them."""
    n = len(pts)
    out = set()
    for i, j in itertools.combinations(range(n), 2):
        sides = [orient_exact(pts[i], pts[j], pts[k]) for k in range(n) if k not in (i, j)]
        if all(s >= 0 for s in sides) or all(s <= 0 for s in sides):
            between = False
            for k in range(n):
                if k in (i, j) or orient_exact(pts[i], pts[j], pts[k]) != 0:
                    continue
                lo = [min(F(pts[i][t]), F(pts[j][t])) for t in (0, 1)]
                hi = [max(F(pts[i][t]), F(pts[j][t])) for t in (0, 1)]
                if all(lo[t] <= F(pts[k][t]) <= hi[t] for t in (0, 1)):
                    between = True
                    break
            if not between:
                out.add((i, j))
    return out


def segment_intersection(p1, p2, q1, q2):
    """Solve p1 + t (p2 - p1) = q1 + u (q2 - q1) exactly; None when parallel or outside."""
    r = (F(p2[0]) - F(p1[0]), F(p2[1]) - F(p1[1]))
    s = (F(q2[0]) - F(q1[0]), F(q2[1]) - F(q1[1]))
    den = r[0] * s[1] - r[1] * s[0]
    if den == 0:
        return None
    w = (F(q1[0]) - F(p1[0]), F(q1[1]) - F(p1[1]))
    t = (w[0] * s[1] - w[1] * s[0]) / den
    u = (w[0] * r[1] - w[1] * r[0]) / den
    return (t, u) if 0 <= t <= 1 and 0 <= u <= 1 else None


def circumcenter(a, b, c):
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    d = 2.0 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
    ux = ((a @ a) * (b[1] - c[1]) + (b @ b) * (c[1] - a[1]) + (c @ c) * (a[1] - b[1])) / d
    uy = ((a @ a) * (c[0] - b[0]) + (b @ b) * (a[0] - c[0]) + (c @ c) * (b[0] - a[0])) / d
    o = np.array([ux, uy])
    return o, float(np.hypot(*(a - o)))


def delaunay_triangles(pts) -> set[tuple[int, int, int]]:
    """Every triple whose circumcircle has no site strictly inside."""
    n = len(pts)
    out = set()
    for t in itertools.combinations(range(n), 3):
        if orient_exact(*(pts[k] for k in t)) == 0:
            continue
        if all(incircle_exact(*(pts[k] for k in t), pts[m]) <= 0 for m in range(n) if m not in t):
            out.add(t)
    return out


def general_position_sites(seed: int, n: int, *, rect=(0.25, 0.25, 0.75, 0.75),
                           margin: float = 0.012, sep: float = 0.02, inside=(0.05, 0.95)):
    """Random sites whose Delaunay triangles are robust.

    A triple with no site clearly inside its circumcircle must also have no site
    within ``margin`` of the circle, and its circumcenter must lie in ``inside``.
    """
    rng = np.random.default_rng(seed)
    while True:
        pts = rng.uniform(rect[:2], rect[2:], size=(n, 2))
        dd = np.hypot(*(pts[:, None] - pts[None]).transpose(2, 0, 1))
        if np.min(dd + np.eye(n)) < sep:
            continue
        ok = True
        for t in itertools.combinations(range(n), 3):
            if abs(orient_exact(*(pts[k] for k in t))) == 0:
                ok = False
                break
            o, r = circumcenter(*(pts[k] for k in t))
            dist = np.hypot(*(pts - o).T)
            others = np.delete(dist, list(t))
            if np.any(others < r - margin):
                continue  # clearly not a Delaunay triangle
            if np.min(others) < r + margin:
                ok = False
                break
            if not np.all((inside[0] < o) & (o < inside[1])):
                ok = False
                break
        if ok:
            return pts


def folded_fixture():
    """Six sites, six triangles: site 5 is pulled across edge (0, 4) so two faces overlap."""
    pts = np.array([(0, 0), (4, 0), (4, 4), (0, 4), (1, 2), (0.5, 2)], dtype=float)
    faces = [(0, 1, 5), (0, 5, 4), (0, 4, 3), (1, 2, 5), (2, 3, 4), (2, 4, 5)]
    edges = {tuple(sorted(e)) for t in faces for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0]))}
    dual = DualTriangulation(pts, edges, [DualFace(t, k, (0.0, 0.0), 0.0) for k, t in enumerate(faces)])
    return dual, SiteSet(pts)
