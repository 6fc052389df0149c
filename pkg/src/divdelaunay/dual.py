"""Straight-edge dual triangulation of a primal Voronoi graph."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .divergence import Divergence
from .geometry import all_colinear
from .sites import SiteSet
from .voronoi import INF, IncidenceDAG

EPS_ECB_REL = 1e-7


def eps_ecb(radius: float) -> float:
    return EPS_ECB_REL * (1.0 + abs(radius))


@dataclass
class PrimalGraph:
    """Voronoi vertices (element indices, plus ``INF``) joined by one edge per Voronoi edge."""

    vertices: list[int]
    locations: dict[int, np.ndarray]
    index_sets: dict[int, tuple[int, ...]]
    edges: list[tuple[int, int, int]]  # (element index, u, v)
    edge_sites: dict[int, tuple[int, int]]
    failures: list[dict] = field(default_factory=list)
    colinear: bool = False


def build_primal_graph(elements, dag: IncidenceDAG | None = None, sites: SiteSet | None = None) -> PrimalGraph:
    """One graph edge per order-2 element between its two incident vertex nodes."""
    if sites is not None and all_colinear(sites.points):
        return PrimalGraph([], {}, {}, [], {}, colinear=True)
    verts = [k for k, el in enumerate(elements) if el.order >= 3]
    locs = {k: np.asarray(elements[k].location) for k in verts}
    isets = {k: elements[k].I for k in verts}
    edges = []
    esites = {}
    failures = []
    has_inf = False
    for k, el in enumerate(elements):
        if el.order != 2 or el.meta.get("isolated"):
            continue
        if len(el.ends) != 2:
            failures.append({"I": list(el.I), "incident_vertices": len(el.ends)})
            continue
        u, v = el.ends
        has_inf |= INF in (u, v)
        edges.append((k, u, v))
        esites[k] = el.I
    if has_inf:
        verts.append(INF)
    return PrimalGraph(verts, locs, isets, edges, esites, failures)


@dataclass(frozen=True)
class DualFace:
    tri: tuple[int, int, int]
    orig: int
    witness: tuple[float, float]
    radius: float


@dataclass(eq=False)
class DualTriangulation:
    """G = (S, E, F) with fan-triangulated faces and their witness balls."""

    points: np.ndarray
    edges: list[tuple[int, int]]
    faces: list[DualFace]
    issues: list[dict] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    chain: bool = False

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        self.edges = sorted({tuple(sorted(map(int, e))) for e in self.edges})

    @property
    def n_vertices(self) -> int:
        return len(self.points)

    def edge_faces(self) -> dict[tuple[int, int], list[int]]:
        out: dict[tuple[int, int], list[int]] = {e: [] for e in self.edges}
        for f, face in enumerate(self.faces):
            a, b, c = face.tri
            for e in ((a, b), (b, c), (c, a)):
                out.setdefault(tuple(sorted(e)), []).append(f)
        return out

    @property
    def boundary(self) -> list[tuple[int, int]]:
        """Edges incident to exactly one face."""
        return sorted(e for e, fs in self.edge_faces().items() if len(fs) == 1)

    def neighbours(self, v: int) -> list[int]:
        return sorted({b if a == v else a for a, b in self.edges if v in (a, b)})

    def halfedges(self) -> dict[tuple[int, int], int | None]:
        """Directed half-edge -> face on its left (``None`` on the outside)."""
        he: dict[tuple[int, int], int | None] = {}
        for a, b in self.edges:
            he[(a, b)] = None
            he[(b, a)] = None
        for f, face in enumerate(self.faces):
            a, b, c = face.tri
            for e in ((a, b), (b, c), (c, a)):
                he[e] = f
        return he

    def rotation(self, v: int) -> tuple[list[int], bool]:
        """Cyclic order of the neighbours of v, read from the face structure.

        Falls back to polar-angle order (second value ``False``) when the faces
        around v do not form a single fan.
        """
        nbrs = self.neighbours(v)
        nxt: dict[int, int] = {}
        conflict = False
        for face in self.faces:
            t = face.tri
            if v not in t:
                continue
            k = t.index(v)
            a, b = t[(k + 1) % 3], t[(k + 2) % 3]
            if a in nxt:
                conflict = True
            nxt[a] = b
        if nxt and not conflict:
            targets = set(nxt.values())
            starts = [a for a in nxt if a not in targets]
            start = starts[0] if len(starts) == 1 else (min(nxt) if not starts else None)
            if start is not None:
                seq = [start]
                while seq[-1] in nxt and nxt[seq[-1]] != start and len(seq) <= len(nbrs):
                    seq.append(nxt[seq[-1]])
                if sorted(seq) == nbrs:
                    return seq, True
        if not nxt and len(nbrs) <= 2:
            return nbrs, True
        p = self.points[v]
        ang = [math.atan2(*(self.points[u] - p)[::-1]) for u in nbrs]
        return [u for _, u in sorted(zip(ang, nbrs))], not self.faces

    def to_off(self) -> str:
        lines = ["OFF", f"{self.n_vertices} {len(self.faces)} {len(self.edges)}"]
        lines += [f"{float(x)!r} {float(y)!r} 0" for x, y in self.points]
        lines += [f"3 {a} {b} {c}" for a, b, c in (f.tri for f in self.faces)]
        return "\n".join(lines) + "\n"

    def write_off(self, path) -> None:
        Path(path).write_text(self.to_off())


def witness_of(d: Divergence, sites: SiteSet, I, center) -> tuple[tuple[float, float], float, list[float]]:
    """Center, radius and per-vertex radius discrepancies of a face's witness ball."""
    c = (float(center[0]), float(center[1]))
    vals = d.eval_from_points(sites.points[list(I)], c)
    r = float(vals[0])
    return c, r, [float(abs(v - r)) for v in vals]


def chain_dual(sites: SiteSet) -> DualTriangulation:
    """Colinear sites: consecutive sites along their line, no faces."""
    pts = sites.points
    if len(pts) == 1:
        return DualTriangulation(pts, [], [], chain=True)
    a = pts[0]
    far = pts[int(np.argmax(np.sum((pts - a) ** 2, axis=1)))]
    t = (pts - a) @ (far - a)
    order = np.argsort(t, kind="stable")
    edges = [(int(order[k]), int(order[k + 1])) for k in range(len(order) - 1)]
    return DualTriangulation(pts, edges, [], chain=True)


def build_dual(primal: PrimalGraph, sites: SiteSet, d: Divergence) -> DualTriangulation:
    """Dualize the primal graph; faces with more than three sites become fans."""
    if primal.colinear:
        return chain_dual(sites)
    issues: list[dict] = [{"kind": "incidence", **f} for f in primal.failures]
    warnings: list[str] = []
    seen: dict[tuple[int, int], int] = {}
    edges = []
    for k, u, v in primal.edges:
        e = tuple(sorted(primal.edge_sites[k]))
        if u == v:
            issues.append({"kind": "self_loop", "edge": list(e), "vertex": u})
        if e in seen:
            issues.append({"kind": "multi_edge", "edge": list(e)})
            continue
        seen[e] = k
        edges.append(e)
    faces: list[DualFace] = []
    for fid, k in enumerate(vk for vk in primal.vertices if vk != INF):
        I = primal.index_sets[k]
        c, r, disc = witness_of(d, sites, I, primal.locations[k])
        if max(disc) > eps_ecb(r):
            warnings.append(f"vertex {list(I)}: witness radii disagree by {max(disc):.3g}")
        ang = [math.atan2(sites[i][1] - c[1], sites[i][0] - c[0]) for i in I]
        cyc = [i for _, i in sorted(zip(ang, I))]
        s = cyc.index(min(cyc))
        cyc = cyc[s:] + cyc[:s]
        for m in range(1, len(cyc) - 1):
            faces.append(DualFace((cyc[0], cyc[m], cyc[m + 1]), fid, c, r))
        for m in range(len(cyc)):
            e = tuple(sorted((cyc[m], cyc[(m + 1) % len(cyc)])))
            if e not in seen:
                issues.append({"kind": "face_side_without_edge", "edge": list(e), "face": fid})
        for m in range(2, len(cyc) - 1):
            edges.append(tuple(sorted((cyc[0], cyc[m]))))
    return DualTriangulation(sites.points, edges, faces, issues, warnings)


def euler_characteristic(dual: DualTriangulation) -> int:
    """V - E + F counting the outer face."""
    return dual.n_vertices - len(dual.edges) + len(dual.faces) + 1


def boundary_is_cycle(dual: DualTriangulation) -> bool:
    """B is a single closed cycle through each of its vertices once."""
    B = dual.boundary
    if len(B) < 3:
        return False
    deg: dict[int, list[int]] = {}
    for a, b in B:
        deg.setdefault(a, []).append(b)
        deg.setdefault(b, []).append(a)
    if any(len(v) != 2 for v in deg.values()):
        return False
    start = B[0][0]
    prev, cur, steps = None, start, 0
    while True:
        nxt = deg[cur][0] if deg[cur][0] != prev else deg[cur][1]
        prev, cur = cur, nxt
        steps += 1
        if cur == start:
            break
    return steps == len(deg)
