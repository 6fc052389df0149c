"""Robust planar primitives.

Orientation is evaluated in floating point against a static error bound
(Shewchuk's ``ccwerrboundA``); anything inside the bound is recomputed with
exact rational arithmetic, so signs never flip on rounding.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

_EPS = np.finfo(float).eps / 2.0
_CCW_ERRBOUND = (3.0 + 16.0 * _EPS) * _EPS
# below this the products may be subnormal and the static bound is invalid
_UNDERFLOW_GUARD = 1e-280


def _orient_exact(ax, ay, bx, by, cx, cy) -> int:
    ax, ay, bx, by, cx, cy = map(Fraction, (ax, ay, bx, by, cx, cy))
    det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (det > 0) - (det < 0)


def orient(a, b, c) -> int:
    """Sign of the doubled signed area of triangle abc (+1 ccw, -1 cw, 0 colinear)."""
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    cx, cy = float(c[0]), float(c[1])
    left = (bx - ax) * (cy - ay)
    right = (by - ay) * (cx - ax)
    det = left - right
    detsum = abs(left) + abs(right)
    if detsum > _UNDERFLOW_GUARD and abs(det) > _CCW_ERRBOUND * detsum:
        return 1 if det > 0 else -1
    return _orient_exact(ax, ay, bx, by, cx, cy)


def orient_many(a, b, c) -> np.ndarray:
    """Vectorized :func:`orient` over broadcastable ``(..., 2)`` arrays."""
    a, b, c = np.broadcast_arrays(
        np.asarray(a, float), np.asarray(b, float), np.asarray(c, float))
    left = (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1])
    right = (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])
    det = left - right
    detsum = np.abs(left) + np.abs(right)
    out = np.sign(det).astype(np.int8)
    unsure = ~((detsum > _UNDERFLOW_GUARD) & (np.abs(det) > _CCW_ERRBOUND * detsum))
    for idx in zip(*np.nonzero(unsure)):
        out[idx] = _orient_exact(a[idx][0], a[idx][1], b[idx][0], b[idx][1],
                                 c[idx][0], c[idx][1])
    return out


def _on_segment(p, a, b) -> bool:
    """p colinear with ab assumed; True if p lies in the closed segment."""
    return (min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))


def segments_properly_intersect(p1, p2, q1, q2) -> bool:
    """True iff the open segments cross at a single point interior to both."""
    o1 = orient(p1, p2, q1)
    o2 = orient(p1, p2, q2)
    o3 = orient(q1, q2, p1)
    o4 = orient(q1, q2, p2)
    return o1 * o2 < 0 and o3 * o4 < 0


def _same(p, q) -> bool:
    return p[0] == q[0] and p[1] == q[1]


def segments_conflict(p1, p2, q1, q2) -> bool:
    """True if two segments meet anywhere other than at a shared endpoint.

    Covers proper crossings, T-junctions and colinear overlaps; this is the
    predicate an embedded straight-line graph must never satisfy.
    """
    shared = [(u, v) for u in (p1, p2) for v in (q1, q2) if _same(u, v)]
    if len(shared) >= 2:
        return True  # same segment twice
    if shared:
        s = shared[0][0]
        p_other = p2 if _same(p1, s) else p1
        q_other = q2 if _same(q1, s) else q1
        if orient(s, p_other, q_other) != 0:
            return False
        # colinear: overlap iff the free ends are on the same side of s
        return (np.dot(np.subtract(p_other, s), np.subtract(q_other, s)) > 0)
    o1 = orient(p1, p2, q1)
    o2 = orient(p1, p2, q2)
    o3 = orient(q1, q2, p1)
    o4 = orient(q1, q2, p2)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    if o1 == 0 and _on_segment(q1, p1, p2):
        return True
    if o2 == 0 and _on_segment(q2, p1, p2):
        return True
    if o3 == 0 and _on_segment(p1, q1, q2):
        return True
    if o4 == 0 and _on_segment(p2, q1, q2):
        return True
    return False


def point_in_triangle(p, a, b, c) -> str:
    """Classify p against triangle abc (either orientation): inside, boundary or outside."""
    o = orient(a, b, c)
    if o == 0:
        for u, v in ((a, b), (b, c), (c, a)):
            if orient(u, v, p) == 0 and _on_segment(p, u, v):
                return "boundary"
        return "outside"
    s1 = orient(a, b, p) * o
    s2 = orient(b, c, p) * o
    s3 = orient(c, a, p) * o
    if s1 < 0 or s2 < 0 or s3 < 0:
        return "outside"
    if s1 == 0 or s2 == 0 or s3 == 0:
        return "boundary"
    return "inside"


@dataclass(frozen=True)
class HullChain:
    """Convex hull of a site set, clockwise.

    ``corners`` holds the strictly convex vertices; ``boundary`` holds every
    site on the hull boundary (corners plus sites interior to hull edges),
    also clockwise and starting at the same corner.
    """

    corners: tuple[int, ...]
    boundary: tuple[int, ...]
    degenerate: bool = False

    def edges(self) -> set[tuple[int, int]]:
        """Unordered consecutive boundary pairs (the hull edge set)."""
        w = self.boundary
        if len(w) < 2:
            return set()
        if self.degenerate:
            pairs = zip(w[:-1], w[1:])
        else:
            pairs = zip(w, w[1:] + w[:1])
        return {tuple(sorted(e)) for e in pairs}


def convex_hull(sites) -> HullChain:
    """Clockwise convex hull by monotone chain with exact turns."""
    pts = np.asarray(sites, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n == 0:
        raise ValueError("convex_hull needs at least one point")
    order = sorted(range(n), key=lambda i: (pts[i, 0], pts[i, 1]))
    if n == 1:
        return HullChain((order[0],), (order[0],), True)

    def half(seq):
        chain: list[int] = []
        for i in seq:
            while len(chain) >= 2 and orient(pts[chain[-2]], pts[chain[-1]], pts[i]) >= 0:
                chain.pop()
            chain.append(i)
        return chain

    # orient >= 0 pops left turns and colinear points -> clockwise chains
    upper = half(order)
    lower = half(order[::-1])
    corners = upper[:-1] + lower[:-1]
    if len(corners) < 3:
        line = order  # all colinear, sorted along the line
        return HullChain((line[0], line[-1]), tuple(line), True)

    boundary: list[int] = []
    m = len(corners)
    for k in range(m):
        a, b = corners[k], corners[(k + 1) % m]
        on = orient_many(pts[a], pts[b], pts) == 0
        cand = [i for i in np.nonzero(on)[0] if i != a and i != b
                and _on_segment(pts[i], pts[a], pts[b])]
        cand.sort(key=lambda i: float(np.dot(pts[i] - pts[a], pts[i] - pts[a])))
        boundary.append(a)
        boundary.extend(int(i) for i in cand)
    return HullChain(tuple(int(c) for c in corners), tuple(boundary), False)


def all_colinear(sites) -> bool:
    pts = np.asarray(sites, dtype=float).reshape(-1, 2)
    if len(pts) < 3:
        return True
    a = pts[0]
    far = int(np.argmax(np.sum((pts - a) ** 2, axis=1)))
    return bool(np.all(orient_many(a, pts[far], pts) == 0))


def point_in_convex_polygon(p, poly: Sequence) -> str:
    """Classify p against a convex polygon given in either orientation."""
    poly = np.asarray(poly, dtype=float)
    m = len(poly)
    signs = [orient(poly[k], poly[(k + 1) % m], p) for k in range(m)]
    pos = any(s > 0 for s in signs)
    neg = any(s < 0 for s in signs)
    if pos and neg:
        return "outside"
    return "boundary" if 0 in signs else "inside"
