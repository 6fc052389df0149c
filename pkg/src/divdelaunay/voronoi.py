"""Discrete second-kind Voronoi diagrams on a triangulated grid.

The grid is built by best-first front propagation (:mod:`.propagation`);
elements of order 1, 2 and >= 3 are then read off the labelling:

* order 1: connected components of equal-label vertices (6-connectivity),
* order 2: chains of grid edges whose endpoints carry two labels, linked
  through triangles that carry exactly those two labels,
* order >= 3: triangles carrying three labels, refined by Newton's method
  and merged when closer than half a cell diagonal, or when one lies
  strictly inside the other's ball a short distance away.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from . import propagation as P
from .divergence import Divergence
from .errors import InputError, InvariantViolation, ResolutionError
from .geometry import convex_hull, point_in_convex_polygon
from .sites import SiteSet

INF = -1  # node id of the vertex at infinity
EPS_VERT = 1e-10
MARGIN_FACTOR = 2.0
INTRUSION_REACH = 2.0  # cell diagonals


@dataclass(frozen=True)
class GridGeometry:
    origin: tuple[float, float]
    spacing: tuple[float, float]
    dims: tuple[int, int]

    def __post_init__(self):
        if self.dims[0] < 2 or self.dims[1] < 2:
            raise InputError("grid needs at least 2x2 vertices")
        if self.spacing[0] <= 0 or self.spacing[1] <= 0:
            raise InputError("grid spacing must be positive")

    @classmethod
    def from_rect(cls, rect, dims) -> "GridGeometry":
        x0, y0, x1, y1 = map(float, rect)
        w, h = int(dims[0]), int(dims[1])
        return cls((x0, y0), ((x1 - x0) / (w - 1), (y1 - y0) / (h - 1)), (w, h))

    @property
    def xs(self) -> np.ndarray:
        return np.arange(self.dims[0]) * self.spacing[0] + self.origin[0]

    @property
    def ys(self) -> np.ndarray:
        return np.arange(self.dims[1]) * self.spacing[1] + self.origin[1]

    @property
    def rect(self) -> tuple[float, float, float, float]:
        return (self.origin[0], self.origin[1], float(self.xs[-1]), float(self.ys[-1]))

    @property
    def cell_diag(self) -> float:
        return math.hypot(*self.spacing)

    @property
    def n_vertices(self) -> int:
        return self.dims[0] * self.dims[1]

    def vertex_xy(self, v) -> np.ndarray:
        v = np.asarray(v)
        w = self.dims[0]
        return np.stack([self.xs[v % w], self.ys[v // w]], axis=-1)

    def contains(self, p) -> bool:
        x0, y0, x1, y1 = self.rect
        return x0 <= p[0] <= x1 and y0 <= p[1] <= y1

    def nearest_vertex(self, p) -> int:
        i = int(round((p[0] - self.origin[0]) / self.spacing[0]))
        j = int(round((p[1] - self.origin[1]) / self.spacing[1]))
        i = min(max(i, 0), self.dims[0] - 1)
        j = min(max(j, 0), self.dims[1] - 1)
        return j * self.dims[0] + i


@dataclass(eq=False)
class LabelGrid:
    """Per-vertex nearest-site labels (row-major, shape ``(H, W)``)."""

    geometry: GridGeometry
    label: np.ndarray
    value: np.ndarray
    counters: dict = field(default_factory=dict)
    argmin: np.ndarray | None = None
    seeds: np.ndarray | None = None

    @property
    def mismatches(self) -> int | None:
        if self.argmin is None:
            return None
        return int(np.count_nonzero(self.label != self.argmin))


def _check_grid_domain(d: Divergence, geom: GridGeometry):
    x0, y0, x1, y1 = geom.rect
    for c in ((x0, y0), (x1, y0), (x0, y1), (x1, y1)):
        if not d.in_domain(c):
            raise InputError(f"grid corner {c} lies outside the domain of the divergence")


def build_label_grid(d: Divergence, sites: SiteSet, geom: GridGeometry, *,
                     parallel: bool = False, exhaustive: bool = True) -> LabelGrid:
    """Label every grid vertex by front propagation from the sites.

    With ``exhaustive`` the brute-force argmin labelling is computed too, so
    callers can tell whether the propagated diagram is the true one.
    """
    pts = sites.points
    for k, p in enumerate(pts):
        if not geom.contains(p):
            raise InputError(f"site {k} at {tuple(p)} lies outside the grid rectangle {geom.rect}")
    d.check_domain(*pts)
    _check_grid_domain(d, geom)
    seeds = np.array([geom.nearest_vertex(p) for p in pts], dtype=np.int64)
    uniq, counts = np.unique(seeds, return_counts=True)
    if np.any(counts > 1):
        v = int(uniq[np.argmax(counts > 1)])
        clash = [int(k) for k in np.nonzero(seeds == v)[0]]
        raise ResolutionError(f"sites {clash} share nearest grid vertex {v}; refine the grid")

    fam, sub, params, fld, fg = d.kernel
    gx, gy = geom.xs, geom.ys
    aux = P.grid_aux(d.kernel, gx, gy, parallel=parallel)
    sx = np.ascontiguousarray(pts[:, 0])
    sy = np.ascontiguousarray(pts[:, 1])
    sb = np.array([P.K.site_aux(fam, sub, x, y) for x, y in pts])
    lab, val, cnt = P.propagate(fam, sub, params, sx, sy, sb, seeds, gx, gy, aux, P._DI, P._DJ)
    w, h = geom.dims
    counters = {"finalize": int(cnt[0]), "relax": int(cnt[1]),
                "relax_in_grid": int(cnt[2]), "max_received": int(cnt[3]),
                "vertices": geom.n_vertices}
    amin = None
    if exhaustive:
        run = P.exhaustive_banded if parallel else P.exhaustive
        amin = run(fam, sub, params, sx, sy, sb, gx, gy, aux)[0].reshape(h, w)
    return LabelGrid(geom, lab.reshape(h, w), val.reshape(h, w), counters, amin, seeds)


# -- grid topology -------------------------------------------------------------

@dataclass(eq=False)
class _Topology:
    eu: np.ndarray
    ev: np.ndarray
    tri_v: np.ndarray
    tri_e: np.ndarray
    edge_tri: np.ndarray


_TOPO_CACHE: dict = {}


def _topology(w: int, h: int) -> _Topology:
    key = (w, h)
    if key in _TOPO_CACHE:
        return _TOPO_CACHE[key]
    vid = np.arange(w * h).reshape(h, w)
    hu, hv = vid[:, :-1].ravel(), vid[:, 1:].ravel()
    vu, vv = vid[:-1, :].ravel(), vid[1:, :].ravel()
    du, dv = vid[:-1, :-1].ravel(), vid[1:, 1:].ravel()
    off_v = hu.size
    off_d = off_v + vu.size
    eu = np.concatenate([hu, vu, du])
    ev = np.concatenate([hv, vv, dv])

    jj, ii = np.meshgrid(np.arange(h - 1), np.arange(w - 1), indexing="ij")
    jj, ii = jj.ravel(), ii.ravel()
    e_h = lambda i, j: j * (w - 1) + i  # noqa: E731
    e_v = lambda i, j: off_v + j * w + i  # noqa: E731
    e_d = lambda i, j: off_d + j * (w - 1) + i  # noqa: E731
    v0 = jj * w + ii
    lower_v = np.stack([v0, v0 + 1, v0 + w + 1], axis=1)
    upper_v = np.stack([v0, v0 + w + 1, v0 + w], axis=1)
    lower_e = np.stack([e_h(ii, jj), e_v(ii + 1, jj), e_d(ii, jj)], axis=1)
    upper_e = np.stack([e_d(ii, jj), e_h(ii, jj + 1), e_v(ii, jj)], axis=1)
    tri_v = np.concatenate([lower_v, upper_v])
    tri_e = np.concatenate([lower_e, upper_e])
    nt_half = lower_v.shape[0]
    edge_tri = np.full((eu.size, 2), -1, dtype=np.int64)
    edge_tri[lower_e.ravel(), 0] = np.repeat(np.arange(nt_half), 3)
    edge_tri[upper_e.ravel(), 1] = np.repeat(np.arange(nt_half, 2 * nt_half), 3)
    topo = _Topology(eu, ev, tri_v, tri_e, edge_tri)
    if len(_TOPO_CACHE) > 4:
        _TOPO_CACHE.clear()
    _TOPO_CACHE[key] = topo
    return topo


# -- elements ------------------------------------------------------------------

@dataclass(eq=False)
class VoronoiElement:
    """Connected component of Vor_I.

    ``touches`` lists indices of higher-order elements whose closure meets
    this one (``INF`` for the vertex at infinity); ``ends`` lists, for an
    order-2 chain, the node at each of its ends.
    """

    I: tuple[int, ...]
    at_infinity: bool = False
    vertices: np.ndarray | None = None
    chain: np.ndarray | None = None
    points: np.ndarray | None = None
    location: np.ndarray | None = None
    ends: list[int] = field(default_factory=list)
    touches: set[int] = field(default_factory=set)
    meta: dict = field(default_factory=dict)

    @property
    def order(self) -> int:
        return len(self.I)

    def sort_key(self):
        return (self.order, self.I, self.meta.get("key", 0))


def refine_vertex(d: Divergence, sites: SiteSet, triple, start, scale: float):
    """Newton solve of D(s_i||p) = D(s_j||p) = D(s_k||p) from ``start``.

    Returns (point, converged). A solution farther than 3 * ``scale`` from the
    start is rejected as spurious.
    """
    s = [sites[t] for t in triple]
    p = np.array(start, dtype=float)

    def resid(q):
        if not d.in_domain(q):
            return None
        v = d.eval_from_points(np.array(s), q)
        return np.array([v[0] - v[1], v[0] - v[2]]), v[0]

    r = resid(p)
    if r is None:
        return p, False
    f, d0 = r
    for _ in range(60):
        if np.max(np.abs(f)) <= EPS_VERT * (1.0 + abs(d0)):
            return p, bool(np.hypot(*(p - start)) <= 3.0 * scale)
        g = [d.grad2(si, p) for si in s]
        J = np.array([g[0] - g[1], g[0] - g[2]])
        try:
            step = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError:
            return p, False
        if not np.all(np.isfinite(step)):
            return p, False
        norm0 = np.max(np.abs(f))
        lam = 1.0
        for _ in range(30):
            q = p + lam * step
            rq = resid(q)
            if rq is not None and np.max(np.abs(rq[0])) < norm0:
                break
            lam *= 0.5
        else:
            return p, False
        p = q
        f, d0 = rq
    ok = np.max(np.abs(f)) <= EPS_VERT * (1.0 + abs(d0))
    return p, bool(ok and np.hypot(*(p - start)) <= 3.0 * scale)


def _union_find(n, pairs):
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    return [find(a) for a in range(n)]


def _intrusion_pairs(d, sites, tree, pts, ok, I, reach) -> set:
    """Pairs of nearby candidates where one lies strictly inside the other's ball.

    A refined triple whose equidistant point is strictly closer to a fourth
    site is not a vertex on its own; when a candidate carrying that site sits
    within ``reach``, the two are one degenerate vertex at grid resolution.
    """
    intr = []
    for p, good, tri in zip(pts, ok, I):
        if not good:
            intr.append(set())
            continue
        v = d.eval_from_points(sites.points, p)
        r = float(np.mean(v[list(tri)]))
        hit = np.nonzero(v < r - 1e-7 * (1.0 + abs(r)))[0]
        intr.append({int(j) for j in hit} - set(tri))
    out = set()
    for a, b in tree.query_pairs(reach):
        if intr[a] & set(I[b]) or intr[b] & set(I[a]):
            out.add((a, b))
    return out


def grid_covers_hull(geom: GridGeometry, sites: SiteSet, factor: float = MARGIN_FACTOR) -> bool:
    """Does the grid contain the sites' bounding box inflated by ``factor``?"""
    lo = sites.points.min(axis=0)
    hi = sites.points.max(axis=0)
    c = 0.5 * (lo + hi)
    half = 0.5 * factor * (hi - lo)
    x0, y0, x1, y1 = geom.rect
    return bool(x0 <= c[0] - half[0] and c[0] + half[0] <= x1
                and y0 <= c[1] - half[1] and c[1] + half[1] <= y1)


def extract_elements(grid: LabelGrid, d: Divergence, sites: SiteSet, labels=None,
                     margin_factor: float = MARGIN_FACTOR) -> "ElementList":
    """Read Voronoi elements and their adjacencies off a labelled grid."""
    geom = grid.geometry
    w, h = geom.dims
    L = np.asarray(grid.label if labels is None else labels, dtype=np.int64).reshape(-1)
    topo = _topology(w, h)
    eu, ev = topo.eu, topo.ev
    unbounded_ok = grid_covers_hull(geom, sites, margin_factor)
    warnings: list[str] = []

    # order 1
    same = L[eu] == L[ev]
    nv = w * h
    g = coo_matrix((np.ones(int(same.sum()), dtype=np.int8), (eu[same], ev[same])), shape=(nv, nv))
    n_rc, rcomp = connected_components(g, directed=False)
    border = np.zeros((h, w), dtype=bool)
    border[0, :] = border[-1, :] = border[:, 0] = border[:, -1] = True
    border = border.ravel()

    # triangles
    tl = L[topo.tri_v]
    nlab = 1 + (tl[:, 0] != tl[:, 1]) + ((tl[:, 2] != tl[:, 0]) & (tl[:, 2] != tl[:, 1]))
    cross = ~same
    cross_ids = np.nonzero(cross)[0]
    cidx = np.full(eu.size, -1, dtype=np.int64)
    cidx[cross_ids] = np.arange(cross_ids.size)

    # order 2: link the two crossing edges of every 2-label triangle
    t2 = np.nonzero(nlab == 2)[0]
    te = topo.tri_e[t2]
    tc = cross[te]
    a = np.where(tc[:, 0], te[:, 0], te[:, 1])
    b = np.where(tc[:, 2], te[:, 2], te[:, 1])
    nc = cross_ids.size
    link = coo_matrix((np.ones(t2.size, dtype=np.int8), (cidx[a], cidx[b])), shape=(nc, nc))
    n_ec, ecomp = connected_components(link, directed=False) if nc else (0, np.zeros(0, int))
    nb = _chain_neighbours(nc, cidx[a], cidx[b])

    # order >= 3 candidates
    t3 = np.nonzero(nlab == 3)[0]
    cand_pts = []
    cand_ok = []
    cand_I = []
    scale = geom.cell_diag
    for t in t3:
        triple = tuple(sorted(int(x) for x in tl[t]))
        start = geom.vertex_xy(topo.tri_v[t]).mean(axis=0)
        p, ok = refine_vertex(d, sites, triple, start, scale)
        cand_pts.append(p if ok else start)
        cand_ok.append(ok)
        cand_I.append(triple)
    eps_merge = 0.5 * scale
    if t3.size:
        tree = cKDTree(np.array(cand_pts))
        pairs = set(tree.query_pairs(eps_merge))
        pairs |= _intrusion_pairs(d, sites, tree, cand_pts, cand_ok, cand_I, INTRUSION_REACH * scale)
        roots = _union_find(t3.size, sorted(pairs))
    else:
        roots = []
    node_of_root: dict[int, int] = {}
    nodes: list[VoronoiElement] = []
    tri_node = {}
    for k, r in enumerate(roots):
        if r not in node_of_root:
            node_of_root[r] = len(nodes)
            nodes.append(VoronoiElement((), meta={"members": [], "key": int(t3[k])}))
        node = nodes[node_of_root[r]]
        node.meta["members"].append(k)
        tri_node[int(t3[k])] = node_of_root[r]
    for node in nodes:
        mem = node.meta.pop("members")
        node.I = tuple(sorted(set().union(*(cand_I[k] for k in mem))))
        good = [cand_pts[k] for k in mem if cand_ok[k]]
        node.points = np.array([cand_pts[k] for k in mem])
        node.location = np.mean(good, axis=0) if good else node.points.mean(axis=0)
        node.meta["triangles"] = [int(t3[k]) for k in mem]
        if len(good) < len(mem):
            node.meta["degenerate"] = True
            warnings.append(f"vertex {node.I}: refinement did not converge, kept at triangle barycenter")
        elif node.order > 3:
            node.meta["merged"] = True

    # chains: ends, geometry, region adjacency
    chains: list[VoronoiElement] = []
    if nc:
        order = np.argsort(ecomp, kind="stable")
        splits = np.split(order, np.cumsum(np.bincount(ecomp, minlength=n_ec))[:-1])
        et = topo.edge_tri[cross_ids]
        for comp_members in splits:
            ids = cross_ids[comp_members]
            u0, v0 = int(eu[ids[0]]), int(ev[ids[0]])
            I = tuple(sorted((int(L[u0]), int(L[v0]))))
            ends = []
            for m in comp_members:
                for t in et[m]:
                    if t < 0:
                        ends.append(INF)
                    elif nlab[t] == 3:
                        ends.append(tri_node[int(t)])
            mids = 0.5 * (geom.vertex_xy(eu[ids]) + geom.vertex_xy(ev[ids]))
            el = VoronoiElement(I, ends=ends, meta={"key": int(ids.min())})
            el.chain = _order_chain(comp_members, nb, mids)
            el.meta["regions"] = sorted({int(rcomp[eu[i]]) for i in ids} | {int(rcomp[ev[i]]) for i in ids})
            chains.append(el)

    # collapse chains swallowed by a merged vertex
    kept_chains = []
    for el in chains:
        bounded = {e for e in el.ends if e != INF}
        if el.ends and INF not in el.ends and len(bounded) == 1:
            node = nodes[bounded.pop()]
            reach = eps_merge + scale
            if np.all(np.hypot(*(el.chain - node.location).T) <= reach):
                node.meta.setdefault("absorbed_edges", []).append(list(el.I))
                continue
        kept_chains.append(el)
    chains = kept_chains

    # regions
    regions: list[VoronoiElement] = []
    order = np.argsort(rcomp, kind="stable")
    splits = np.split(order, np.cumsum(np.bincount(rcomp, minlength=n_rc))[:-1])
    for c, verts in enumerate(splits):
        regions.append(VoronoiElement((int(L[verts[0]]),), vertices=verts,
                                      meta={"key": int(verts[0]), "comp": c}))

    # adjacency (element objects first, indices after sorting)
    region_of_comp = {el.meta["comp"]: el for el in regions}
    for el in regions:
        if unbounded_ok and border[el.vertices].any():
            el.at_infinity = True
            el.touches.add(INF)
    for el in chains:
        for c in el.meta.pop("regions"):
            region_of_comp[c].touches.add(id(el))
        el.at_infinity = unbounded_ok and INF in el.ends
        if not unbounded_ok:
            el.ends = [e for e in el.ends if e != INF]
    node_ids = {k: id(n) for k, n in enumerate(nodes)}
    for t, k in tri_node.items():
        for v in topo.tri_v[t]:
            region_of_comp[int(rcomp[v])].touches.add(node_ids[k])
    for el in chains:
        el.ends = [INF if e == INF else node_ids[e] for e in el.ends]
        el.touches |= set(el.ends)

    elements = sorted(regions + chains + nodes, key=VoronoiElement.sort_key)
    index = {id(el): k for k, el in enumerate(elements)}
    index[INF] = INF
    for el in elements:
        el.touches = {index[t] for t in el.touches}
        el.ends = [index[e] for e in el.ends]
        el.meta.pop("comp", None)
    return ElementList(elements, warnings, unbounded_ok)


def _chain_neighbours(nc, x, y):
    """Up to two linked crossing edges per crossing edge (-1 when absent)."""
    nb = np.full((nc, 2), -1, dtype=np.int64)
    src = np.concatenate([x, y])
    dst = np.concatenate([y, x])
    order = np.argsort(src, kind="stable")
    src, dst = src[order], dst[order]
    first = np.ones(src.size, dtype=bool)
    first[1:] = src[1:] != src[:-1]
    slot = np.where(first, 0, 1)
    nb[src, slot] = dst
    return nb


def _order_chain(members, nb, mids):
    """Order the crossing-edge midpoints of one chain into a polyline."""
    if len(members) <= 2:
        return mids
    pos = {int(m): k for k, m in enumerate(members)}
    start = next((m for m in members if (nb[m] < 0).any()), members[0])
    seq = [pos[int(start)]]
    prev, cur = -1, int(start)
    while True:
        nxt = next((int(q) for q in nb[cur] if q >= 0 and q != prev and pos[int(q)] != seq[0]), None)
        if nxt is None:
            break
        seq.append(pos[nxt])
        prev, cur = cur, nxt
    if len(seq) < len(members):  # branching should not happen; keep the rest unordered
        seen = set(seq)
        seq += [k for k in range(len(members)) if k not in seen]
    return mids[seq]


class ElementList(list):
    """Elements sorted by (order, I) plus extraction diagnostics."""

    def __init__(self, items=(), warnings=None, grid_covers_hull=True):
        super().__init__(items)
        self.warnings = list(warnings or [])
        self.grid_covers_hull = grid_covers_hull


def element_warnings(elements) -> list[str]:
    return list(getattr(elements, "warnings", []))


# -- orphans -------------------------------------------------------------------

def orphan_check(elements, n_sites: int | None = None) -> dict:
    """Count connected components per site region and per Voronoi edge."""
    counts: dict[int, int] = {}
    edges: dict[tuple, int] = {}
    for el in elements:
        if el.order == 1:
            counts[el.I[0]] = counts.get(el.I[0], 0) + 1
        elif el.order == 2 and not el.meta.get("isolated"):
            edges[el.I] = edges.get(el.I, 0) + 1
    if n_sites is None:
        n_sites = max(counts, default=-1) + 1
    per_site = [counts.get(k, 0) for k in range(n_sites)]
    orphans = [{"site": k, "components": c} for k, c in enumerate(per_site) if c > 1]
    missing = [k for k, c in enumerate(per_site) if c == 0]
    split_edges = [{"I": list(I), "components": c} for I, c in sorted(edges.items()) if c > 1]
    return {"orphan_free": not orphans and not missing,
            "region_components": per_site,
            "orphans": orphans,
            "missing_sites": missing,
            "edge_components": {f"{i}-{j}": c for (i, j), c in sorted(edges.items())},
            "split_edges": split_edges}


def lattice_components(geom: GridGeometry, labels) -> dict[int, int]:
    """Number of 6-connected components of every label present."""
    w, h = geom.dims
    L = np.asarray(labels, dtype=np.int64).reshape(-1)
    topo = _topology(w, h)
    same = L[topo.eu] == L[topo.ev]
    nv = w * h
    g = coo_matrix((np.ones(int(same.sum()), dtype=np.int8), (topo.eu[same], topo.ev[same])), shape=(nv, nv))
    _, comp = connected_components(g, directed=False)
    out: dict[int, int] = {}
    for lab in np.unique(L):
        out[int(lab)] = int(np.unique(comp[L == lab]).size)
    return out


def bridged_components(geom: GridGeometry, d: Divergence, sites: SiteSet, labels, site: int) -> int:
    """Components of a site's region once near-tie vertices are allowed as bridges.

    A vertex v bridges for site a when D(s_a||v) exceeds the nearest value by
    no more than the largest change of D(s_a||.) along a grid edge at v. Thin
    wedges that the lattice samples as separate pieces join up; regions split
    by a margin wider than one grid step do not.
    """
    w, h = geom.dims
    L = np.asarray(labels, dtype=np.int64).reshape(-1)
    xy = geom.vertex_xy(np.arange(w * h))
    best = np.empty(w * h)
    for k in np.unique(L):
        m = L == k
        best[m] = d.eval_to_points(sites[int(k)], xy[m])
    va = d.eval_to_points(sites[site], xy)
    topo = _topology(w, h)
    de = np.abs(va[topo.eu] - va[topo.ev])
    tau = np.zeros(w * h)
    np.maximum.at(tau, topo.eu, de)
    np.maximum.at(tau, topo.ev, de)
    near = (va - best) <= tau
    ok = near[topo.eu] & near[topo.ev]
    g = coo_matrix((np.ones(int(ok.sum()), dtype=np.int8), (topo.eu[ok], topo.ev[ok])), shape=(w * h, w * h))
    _, comp = connected_components(g, directed=False)
    return int(np.unique(comp[L == site]).size)


# -- incidence -----------------------------------------------------------------

@dataclass
class IncidenceDAG:
    n_nodes: int
    arcs: list[tuple[int, int]]

    def successors(self, k: int) -> list[int]:
        return [b for a, b in self.arcs if a == k]

    def predecessors(self, k: int) -> list[int]:
        return [a for a, b in self.arcs if b == k]

    def is_acyclic(self) -> bool:
        adj: dict[int, list[int]] = {}
        for a, b in self.arcs:
            adj.setdefault(a, []).append(b)
        state: dict[int, int] = {}
        for root in list(adj):
            if state.get(root):
                continue
            stack = [(root, iter(adj.get(root, ())))]
            state[root] = 1
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    state[node] = 2
                    stack.pop()
                elif state.get(nxt) == 1:
                    return False
                elif not state.get(nxt):
                    state[nxt] = 1
                    stack.append((nxt, iter(adj.get(nxt, ()))))
        return True


def build_incidence(elements) -> IncidenceDAG:
    """Arcs I -> J between elements whose closures meet, with I a strict subset of J."""
    arcs = set()
    for k, el in enumerate(elements):
        for t in el.touches:
            if t != INF:
                J = elements[t].I
                if not (set(el.I) < set(J)):
                    raise InvariantViolation(f"incidence {el.I} -> {J} is not a strict inclusion")
            arcs.add((k, t))
    dag = IncidenceDAG(len(elements), sorted(arcs))
    if not dag.is_acyclic():
        raise InvariantViolation("incidence graph has a cycle")
    return dag


def incidence_arity(elements, dag: IncidenceDAG) -> dict:
    """Order-2 elements must meet exactly two vertex nodes (infinity counts)."""
    bad = []
    for k, el in enumerate(elements):
        if el.order != 2 or el.meta.get("isolated"):
            continue
        n_ends = len(el.ends)
        if n_ends != 2:
            bad.append({"I": list(el.I), "ends": n_ends})
    return {"pass": not bad, "violations": bad}


def _drop(elements, drop: set[int]):
    keep = [k for k in range(len(elements)) if k not in drop]
    remap = {old: new for new, old in enumerate(keep)}
    remap[INF] = INF
    out = []
    for old in keep:
        el = elements[old]
        el.touches = {remap[t] for t in el.touches if t in remap}
        el.ends = [remap[e] for e in el.ends if e in remap]
        out.append(el)
    return ElementList(out, element_warnings(elements), getattr(elements, "grid_covers_hull", True))


def discard_isolated_edges(elements, dag: IncidenceDAG):
    """Absorb order-2 components incident to no vertex node into their containing region.

    Returns ``(elements, dag, absorbed)``.
    """
    isolated = []
    for k, el in enumerate(elements):
        if el.order == 2 and not any(t == INF or elements[t].order >= 3 for t in dag.successors(k)):
            isolated.append(k)
    if not isolated:
        return elements, dag, []
    absorbed = []
    for k in isolated:
        el = elements[k]
        regs = dag.predecessors(k)
        outer = [r for r in regs if any(
            t != k and (t == INF or (elements[t].order >= 2 and t not in isolated))
            for t in dag.successors(r))]
        entry = {"I": list(el.I)}
        if len(outer) == 1:
            entry["container"] = elements[outer[0]].I[0]
        else:
            big = max(regs, key=lambda r: len(elements[r].vertices)) if regs else None
            entry["container"] = elements[big].I[0] if big is not None else None
            entry["warning"] = "isolated edge incident to both regions; grid may be too coarse"
        absorbed.append(entry)
    out = _drop(elements, set(isolated))
    return out, build_incidence(out), absorbed


# -- extremal gradients ------------------------------------------------------------

def _dist_to_hull(g, others) -> float:
    others = np.asarray(others, dtype=float)
    if len(others) == 1:
        return float(np.hypot(*(g - others[0])))
    hull = convex_hull(others)
    poly = others[list(hull.corners)]
    if not hull.degenerate and point_in_convex_polygon(g, poly) != "outside":
        return 0.0
    segs = [(poly[i], poly[(i + 1) % len(poly)]) for i in range(len(poly))] if len(poly) > 1 else []
    best = math.inf
    for a, b in segs:
        ab = b - a
        t = float(np.clip(np.dot(g - a, ab) / max(np.dot(ab, ab), 1e-300), 0.0, 1.0))
        best = min(best, float(np.hypot(*(g - (a + t * ab)))))
    return best


def ega_check(d: Divergence, sites: SiteSet, vertex) -> dict:
    """Are the gradients -grad_p D(s_k || p) at the vertex distinct and extremal?"""
    I = vertex.I if hasattr(vertex, "I") else tuple(vertex[0])
    p = vertex.location if hasattr(vertex, "location") else np.asarray(vertex[1], dtype=float)
    g = np.array([-d.grad2(sites[k], p) for k in I])
    eps = 1e-7 * (1.0 + float(np.max(np.hypot(g[:, 0], g[:, 1]))))
    reasons = []
    for a in range(len(I)):
        for b in range(a + 1, len(I)):
            if np.hypot(*(g[a] - g[b])) <= eps:
                reasons.append(f"gradients of sites {I[a]} and {I[b]} coincide")
    for a in range(len(I)):
        others = np.delete(g, a, axis=0)
        if _dist_to_hull(g[a], others) <= eps:
            reasons.append(f"gradient of site {I[a]} is not extremal")
    return {"I": list(I), "pass": not reasons, "gradients": g.tolist(), "reasons": reasons}
