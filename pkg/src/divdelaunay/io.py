"""JSON dumps of label grids, Voronoi elements and duals."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .divergence import Divergence, from_config
from .dual import DualFace, DualTriangulation
from .errors import InputError
from .sites import SiteSet
from .voronoi import GridGeometry, LabelGrid

DIAGRAM_FORMAT = "divdelaunay-diagram/1"


def rle_encode(a) -> list[list[int]]:
    """Run-length encode a flat integer array as ``[[value, count], ...]``."""
    a = np.asarray(a).ravel()
    if a.size == 0:
        return []
    cut = np.flatnonzero(np.diff(a)) + 1
    starts = np.concatenate([[0], cut])
    counts = np.diff(np.concatenate([starts, [a.size]]))
    return [[int(a[s]), int(c)] for s, c in zip(starts, counts)]


def rle_decode(runs, size: int | None = None) -> np.ndarray:
    if not runs:
        return np.zeros(0, dtype=np.int64)
    vals, counts = np.asarray(runs, dtype=np.int64).T
    out = np.repeat(vals, counts)
    if size is not None and out.size != size:
        raise InputError(f"label runs cover {out.size} vertices, grid has {size}")
    return out


def _element_record(el) -> dict:
    rec = {"I": list(el.I), "order": el.order, "at_infinity": bool(el.at_infinity),
           "touches": sorted(el.touches)}
    if el.order == 2:
        rec["ends"] = list(el.ends)
        rec["points"] = np.round(el.chain, 12).tolist() if el.chain is not None else []
    if el.order >= 3:
        rec["location"] = [float(x) for x in el.location]
    if el.order == 1:
        rec["size"] = int(len(el.vertices))
    for k in ("merged", "degenerate", "absorbed_edges"):
        if k in el.meta:
            rec[k] = el.meta[k]
    return rec


def diagram_to_dict(d: Divergence, sites: SiteSet, grid: LabelGrid, elements=None,
                    dag=None, extra: dict | None = None) -> dict:
    g = grid.geometry
    out = {
        "format": DIAGRAM_FORMAT,
        "divergence": d.config,
        "sites": sites.points.tolist(),
        "grid": {"origin": list(g.origin), "spacing": list(g.spacing), "dims": list(g.dims)},
        "labels": rle_encode(grid.label),
        "counters": {k: int(v) for k, v in grid.counters.items()},
    }
    if grid.argmin is not None:
        out["argmin"] = rle_encode(grid.argmin)
    if elements is not None:
        out["elements"] = [_element_record(el) for el in elements]
    if dag is not None:
        out["incidence"] = [list(a) for a in dag.arcs]
    if extra:
        out.update(extra)
    return out


def _read_json(path) -> dict:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise InputError(f"{path}: expected a JSON object")
    return raw


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")


def save_diagram(path, *args, **kw) -> None:
    write_json(diagram_to_dict(*args, **kw), path)


def load_diagram(path) -> tuple[Divergence, SiteSet, LabelGrid, dict]:
    """Divergence, sites and label grid from a diagram dump, plus the raw record."""
    raw = _read_json(path)
    try:
        if raw.get("format") != DIAGRAM_FORMAT:
            raise InputError(f"{path}: not a diagram dump")
        d = from_config(raw["divergence"])
        sites = SiteSet(np.asarray(raw["sites"], dtype=float))
        gr = raw["grid"]
        geom = GridGeometry(tuple(map(float, gr["origin"])), tuple(map(float, gr["spacing"])),
                            tuple(map(int, gr["dims"])))
        w, h = geom.dims
        label = rle_decode(raw["labels"], w * h).reshape(h, w)
        argmin = rle_decode(raw["argmin"], w * h).reshape(h, w) if "argmin" in raw else None
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"{path}: malformed diagram dump ({exc})") from exc
    if label.min() < 0 or label.max() >= len(sites):
        raise InputError(f"{path}: labels out of range")
    grid = LabelGrid(geom, label, np.full(label.shape, np.nan), raw.get("counters", {}), argmin)
    return d, sites, grid, raw


def dual_to_dict(dual: DualTriangulation) -> dict:
    return {
        "sites": dual.points.tolist(),
        "edges": [list(e) for e in dual.edges],
        "faces": [{"tri": list(f.tri), "orig": f.orig, "witness": list(f.witness),
                   "radius": f.radius} for f in dual.faces],
        "boundary": [list(e) for e in dual.boundary],
        "chain": dual.chain,
        "issues": dual.issues,
        "warnings": dual.warnings,
    }


def save_dual(dual: DualTriangulation, path) -> None:
    write_json(dual_to_dict(dual), path)


def dual_from_dict(raw: dict) -> DualTriangulation:
    faces = [DualFace(tuple(int(v) for v in f["tri"]), int(f["orig"]),
                      tuple(float(c) for c in f["witness"]), float(f["radius"]))
             for f in raw["faces"]]
    n = len(raw["sites"])
    for f in faces:
        if len(f.tri) != 3 or not all(0 <= v < n for v in f.tri):
            raise InputError("dual face refers to a missing site")
    edges = [tuple(int(v) for v in e) for e in raw["edges"]]
    if any(len(e) != 2 or not all(0 <= v < n for v in e) for e in edges):
        raise InputError("dual edge refers to a missing site")
    return DualTriangulation(np.asarray(raw["sites"], dtype=float), edges, faces,
                             list(raw.get("issues", [])), list(raw.get("warnings", [])),
                             bool(raw.get("chain", False)))


def load_dual(path) -> DualTriangulation:
    raw = _read_json(path)
    try:
        return dual_from_dict(raw)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"{path}: malformed dual dump ({exc})") from exc
