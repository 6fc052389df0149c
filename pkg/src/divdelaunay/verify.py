"""Executable checks on a dual triangulation: empty balls, one-forms, folds, embedding."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .divergence import Divergence
from .dual import DualTriangulation, boundary_is_cycle, eps_ecb, euler_characteristic
from .errors import DegenerateInputError, InvariantViolation
from .geometry import orient, orient_many, point_in_convex_polygon, segments_conflict
from .sites import SiteSet
from .voronoi import ega_check, incidence_arity

EPS_ORTHO = 1e-9
MAX_DIRECTION_TRIES = 1000


# -- empty circum-balls ------------------------------------------------------------

def ecb_audit(dual: DualTriangulation, d: Divergence, sites: SiteSet) -> dict:
    """No site lies strictly inside any witness ball (up to eps_ecb)."""
    groups: dict[int, tuple[tuple[float, float], float, set[int]]] = {}
    for f in dual.faces:
        c, r, vs = groups.get(f.orig, (f.witness, f.radius, set()))
        groups[f.orig] = (c, r, vs | set(f.tri))
    failures = []
    slack = math.inf
    for orig, (c, r, vs) in sorted(groups.items()):
        vals = d.eval_from_points(sites.points, c)
        others = np.array([k for k in range(len(sites)) if k not in vs], dtype=int)
        if len(others) == 0:
            continue
        gap = vals[others] - r
        slack = min(slack, float(gap.min()))
        for k in others[gap < -eps_ecb(r)]:
            for fi, f in enumerate(dual.faces):
                if f.orig == orig:
                    failures.append({"face": fi, "site": int(k), "deficit": float(r - vals[k])})
    return {"pass": not failures, "failures": failures, "faces": len(dual.faces),
            "min_slack": None if slack == math.inf else slack}


# -- discrete one-forms --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OneForm:
    """xi(i, j) = n.s_i - n.s_j for a unit direction n."""

    direction: tuple[float, float]
    heights: np.ndarray

    def __call__(self, i: int, j: int) -> float:
        return float(self.heights[i] - self.heights[j])

    def values(self, dual: DualTriangulation) -> dict[tuple[int, int], float]:
        out = {}
        for a, b in dual.edges:
            out[(a, b)] = self(a, b)
            out[(b, a)] = self(b, a)
        return out


def _vanishes(dual: DualTriangulation, n) -> bool:
    if not dual.edges:
        return False
    e = np.asarray(dual.edges)
    diff = dual.points[e[:, 0]] - dual.points[e[:, 1]]
    return bool(np.any(np.abs(diff @ n) <= EPS_ORTHO * np.hypot(diff[:, 0], diff[:, 1])))


def one_form_for(dual: DualTriangulation, direction) -> OneForm | None:
    """The one-form of a given direction, or None if it vanishes on some edge."""
    n = np.asarray(direction, dtype=float)
    n = n / np.hypot(*n)
    if _vanishes(dual, n):
        return None
    return OneForm((float(n[0]), float(n[1])), dual.points @ n)


def make_one_form(dual: DualTriangulation, seed: int | np.random.Generator = 0) -> OneForm:
    """Draw random directions until the induced one-form is non-vanishing."""
    if not dual.edges:
        raise DegenerateInputError("a one-form needs at least one edge")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    for _ in range(MAX_DIRECTION_TRIES):
        t = rng.uniform(0.0, 2.0 * math.pi)
        form = one_form_for(dual, (math.cos(t), math.sin(t)))
        if form is not None:
            return form
    raise DegenerateInputError("every sampled direction is orthogonal to some edge")


def _sign_changes(vals) -> int:
    s = [v > 0 for v in vals]
    sc = sum(s[k] != s[(k + 1) % len(s)] for k in range(len(s)))
    if sc % 2:
        raise InvariantViolation("odd number of sign changes")
    return sc


def vertex_index(dual: DualTriangulation, xi: OneForm, v: int) -> int:
    rot, _ = dual.rotation(v)
    if not rot:
        return 1
    return 1 - _sign_changes([xi(v, u) for u in rot]) // 2


def face_index(dual: DualTriangulation, xi: OneForm, f: int) -> int:
    a, b, c = dual.faces[f].tri
    return 1 - _sign_changes([xi(a, b), xi(b, c), xi(c, a)]) // 2


def poincare_hopf_check(dual: DualTriangulation, xi: OneForm) -> dict:
    vi = [vertex_index(dual, xi, v) for v in range(dual.n_vertices)]
    fi = [face_index(dual, xi, f) for f in range(len(dual.faces))]
    total = sum(vi) + sum(fi)
    bnd = {v for e in dual.boundary for v in e}
    interior = [k for k in range(dual.n_vertices) if k not in bnd]
    return {"pass": total == 2, "sum": total, "direction": list(xi.direction),
            "vertex_indices": vi, "face_indices": fi,
            "interior_index_sum": sum(vi[k] for k in interior),
            "max_face_index": max(fi, default=0)}


# -- fold-overs ---------------------------------------------------------------------

def fold_over_scan(dual: DualTriangulation, with_degenerate: bool = False):
    """Interior edges whose two faces lie on the same side of the edge's line."""
    folded, degenerate = [], []
    for (a, b), fs in sorted(dual.edge_faces().items()):
        if len(fs) != 2:
            continue
        opp = [next(v for v in dual.faces[f].tri if v not in (a, b)) for f in fs]
        o1 = orient(dual.points[a], dual.points[b], dual.points[opp[0]])
        o2 = orient(dual.points[a], dual.points[b], dual.points[opp[1]])
        if o1 == 0 or o2 == 0:
            degenerate.append((a, b))
        elif o1 == o2:
            folded.append((a, b))
    return (folded, degenerate) if with_degenerate else folded


def negative_index_witness(dual: DualTriangulation, directions: int = 360) -> dict | None:
    """Search evenly spread directions for an interior vertex of negative index."""
    bnd = {v for e in dual.boundary for v in e}
    interior = [v for v in range(dual.n_vertices) if v not in bnd and dual.neighbours(v)]
    for k in range(directions):
        t = 2.0 * math.pi * (k + 0.5) / directions
        xi = one_form_for(dual, (math.cos(t), math.sin(t)))
        if xi is None:
            continue
        for v in interior:
            ind = vertex_index(dual, xi, v)
            if ind < 0:
                return {"direction": list(xi.direction), "vertex": v, "index": ind}
    return None


# -- boundary and embedding -----------------------------------------------------------

def boundary_equality_check(dual: DualTriangulation, sites: SiteSet) -> dict:
    """B against consecutive pairs of the hull boundary chain."""
    hull = set(sites.hull.edges())
    B = set(dual.edges) if dual.chain else set(dual.boundary)
    missing = sorted(hull - B)
    extra = sorted(B - hull)
    return {"pass": not missing and not extra,
            "missing": [list(e) for e in missing], "extra": [list(e) for e in extra]}


def _face_counts(dual: DualTriangulation, pts: np.ndarray):
    """Per point: number of faces strictly containing it, and whether it is on a face side."""
    tri = np.array([f.tri for f in dual.faces], dtype=int)
    A, B, C = (dual.points[tri[:, k]][:, None, :] for k in range(3))
    P = pts[None, :, :]
    o = orient_many(A[:, 0], B[:, 0], C[:, 0]).astype(int)[:, None]
    s1 = orient_many(A, B, P) * o
    s2 = orient_many(B, C, P) * o
    s3 = orient_many(C, A, P) * o
    nonneg = (s1 >= 0) & (s2 >= 0) & (s3 >= 0) & (o != 0)
    inside = nonneg & (s1 > 0) & (s2 > 0) & (s3 > 0)
    on_side = nonneg & ~inside
    return inside.sum(axis=0), on_side.any(axis=0)


def _hull_samples(dual: DualTriangulation, sites: SiteSet, samples: int, rng) -> np.ndarray:
    poly = sites.points[list(sites.hull.corners)]
    lo, hi = poly.min(axis=0), poly.max(axis=0)
    out = []
    while len(out) < samples:
        cand = rng.uniform(lo, hi, size=(max(64, 2 * (samples - len(out))), 2))
        for p in cand:
            if point_in_convex_polygon(p, poly) == "inside":
                out.append(p)
                if len(out) == samples:
                    break
    return np.array(out)


def edge_conflicts(dual: DualTriangulation, limit: int = 20) -> list[tuple]:
    """All pairs of edges meeting other than at a shared endpoint (exact predicates)."""
    E = np.asarray(dual.edges, dtype=int).reshape(-1, 2)
    m = len(E)
    P = dual.points
    a, b = P[E[:, 0]], P[E[:, 1]]
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    found = []
    for k in range(m - 1):
        j = np.arange(k + 1, m)
        box = np.all(lo[j] <= hi[k], axis=1) & np.all(lo[k] <= hi[j], axis=1)
        j = j[box]
        if len(j) == 0:
            continue
        shared = ((E[j, 0] == E[k, 0]) | (E[j, 0] == E[k, 1])
                  | (E[j, 1] == E[k, 0]) | (E[j, 1] == E[k, 1]))
        for jj in j[shared]:
            if segments_conflict(a[k], b[k], a[jj], b[jj]):
                found.append((tuple(E[k]), tuple(E[jj])))
        j = j[~shared]
        if len(j) == 0:
            continue
        o1 = orient_many(a[k], b[k], a[j])
        o2 = orient_many(a[k], b[k], b[j])
        o3 = orient_many(a[j], b[j], a[k])
        o4 = orient_many(a[j], b[j], b[k])
        proper = (o1 * o2 < 0) & (o3 * o4 < 0)
        touch = (o1 == 0) | (o2 == 0) | (o3 == 0) | (o4 == 0)
        for jj in j[proper]:
            found.append((tuple(E[k]), tuple(E[jj])))
        for jj in j[touch & ~proper]:
            if segments_conflict(a[k], b[k], a[jj], b[jj]):
                found.append((tuple(E[k]), tuple(E[jj])))
        if len(found) >= limit:
            break
    return [(tuple(map(int, e)), tuple(map(int, f))) for e, f in found]


def embedding_check(dual: DualTriangulation, sites: SiteSet, samples: int = 1000, seed: int = 0) -> dict:
    """(a) every sampled hull-interior point lies in exactly one face; (b) no edge conflicts."""
    rng = np.random.default_rng(seed)
    bad_points = []
    hist: dict[int, int] = {}
    if dual.faces and samples > 0:
        pts = _hull_samples(dual, sites, samples, rng)
        counts, on_side = _face_counts(dual, pts)
        while on_side.any():  # re-sample points that hit a face side
            redo = _hull_samples(dual, sites, int(on_side.sum()), rng)
            pts[on_side] = redo
            c2, s2 = _face_counts(dual, redo)
            counts[on_side] = c2
            on_side[np.flatnonzero(on_side)] = s2
        for c in counts:
            hist[int(c)] = hist.get(int(c), 0) + 1
        bad = np.flatnonzero(counts != 1)
        bad_points = [{"point": pts[i].tolist(), "count": int(counts[i])} for i in bad[:10]]
        cover_ok = len(bad) == 0
    else:
        cover_ok = True
    conflicts = edge_conflicts(dual)
    return {"pass": cover_ok and not conflicts, "cover_pass": cover_ok,
            "segments_pass": not conflicts, "face_count_histogram": {str(k): v for k, v in sorted(hist.items())},
            "bad_points": bad_points, "conflicts": [[list(e), list(f)] for e, f in conflicts]}


# -- report --------------------------------------------------------------------------

MANDATORY = ("orphan", "incidence_arity", "simplicity", "ecb", "boundary_equality",
             "one_form_ph", "fold_over", "embedding", "euler")


@dataclass
class VerificationReport:
    checks: dict = field(default_factory=dict)

    def set(self, name: str, status: str, **diag):
        self.checks[name] = {"status": status, **diag}

    @property
    def verdict(self) -> str:
        ok = all(self.checks.get(k, {"status": "pass"})["status"] in ("pass", "skipped")
                 for k in MANDATORY)
        return "pass" if ok else "fail"

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        return {"checks": self.checks, "verdict": self.verdict}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, default=_jsonable)


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, tuple)):
        return list(o)
    raise TypeError(type(o).__name__)


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


def verify(dual: DualTriangulation, d: Divergence, sites: SiteSet, *, elements=None,
           dag=None, orphan: dict | None = None, absorbed=None, samples: int = 1000,
           seed: int = 0, n_forms: int = 20) -> VerificationReport:
    """Run every check and collect a report."""
    rep = VerificationReport()
    if orphan is not None:
        rep.set("orphan", _status(orphan["orphan_free"]), **orphan)
    if absorbed is not None:
        rep.set("isolated_edges", "warning" if absorbed else "pass", absorbed=list(absorbed))
    if elements is not None:
        ar = incidence_arity(elements, dag)
        rep.set("incidence_arity", _status(ar["pass"]), violations=ar["violations"])
        egas = [ega_check(d, sites, el) for el in elements
                if el.order >= 3 and not el.at_infinity and el.location is not None]
        failed = [e for e in egas if not e["pass"]]
        rep.set("ega", "warning" if failed else "pass", vertices=len(egas), failures=failed)

    simple = [i for i in dual.issues if i["kind"] in ("self_loop", "multi_edge", "incidence")]
    rep.set("simplicity", _status(not simple), issues=dual.issues, warnings=dual.warnings)

    ecb = ecb_audit(dual, d, sites)
    rep.set("ecb", _status(ecb["pass"]), **ecb)

    beq = boundary_equality_check(dual, sites)
    rep.set("boundary_equality", _status(beq["pass"]), cycle=dual.chain or boundary_is_cycle(dual), **beq)

    if not beq["pass"]:
        rep.set("one_form_ph", "skipped", reason="boundary equality failed")
    elif not dual.faces:
        rep.set("one_form_ph", "skipped", reason="no faces")
    else:
        rng = np.random.default_rng(seed)
        runs = [poincare_hopf_check(dual, make_one_form(dual, rng)) for _ in range(n_forms)]
        sums = [r["sum"] for r in runs]
        rep.set("one_form_ph", _status(all(s == 2 for s in sums)), sums=sums,
                directions=[r["direction"] for r in runs],
                interior_index_sums=[r["interior_index_sum"] for r in runs],
                max_face_index=max(r["max_face_index"] for r in runs))

    folded, degenerate = fold_over_scan(dual, with_degenerate=True)
    diag = {"folded": [list(e) for e in folded], "degenerate": [list(e) for e in degenerate]}
    if folded:
        diag["negative_index_witness"] = negative_index_witness(dual)
    rep.set("fold_over", _status(not folded and not degenerate), **diag)

    emb = embedding_check(dual, sites, samples=samples, seed=seed)
    rep.set("embedding", _status(emb["pass"]), **emb)

    chi = euler_characteristic(dual)
    rep.set("euler", _status(chi == 2), value=chi)
    return rep
