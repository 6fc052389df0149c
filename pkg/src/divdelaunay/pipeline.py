"""Run configuration and the build -> dual -> verify pipeline."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .divergence import Divergence, from_config
from .dual import DualTriangulation, build_dual, build_primal_graph
from .errors import InputError
from .metric_field import MetricField
from .sites import NetParams, SiteSet, generate_epsilon_net, generate_random, load_sites, sigma_surrogate
from .verify import VerificationReport, verify
from .voronoi import (GridGeometry, LabelGrid, bridged_components, build_incidence, build_label_grid,
                      discard_isolated_edges, extract_elements, lattice_components, orphan_check)

_KEYS = {"divergence", "sites", "grid", "seed", "samples", "parallel"}


@dataclass(frozen=True)
class RunConfig:
    divergence: dict = field(default_factory=lambda: {"family": "quadratic"})
    sites: dict = field(default_factory=dict)
    rect: tuple[float, float, float, float] = (0.0, 0.0, 1.0, 1.0)
    dims: tuple[int, int] = (256, 256)
    seed: int = 0
    samples: int = 1000
    parallel: bool = False
    base_dir: Path = Path(".")

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def parse_grid(text: str) -> tuple[int, int]:
    """``"512x256"`` -> (512, 256)."""
    try:
        w, h = (int(t) for t in text.lower().split("x"))
    except ValueError as exc:
        raise InputError(f"grid must look like WxH, got {text!r}") from exc
    if w < 2 or h < 2:
        raise InputError("grid needs at least 2x2 vertices")
    return w, h


def config_from_dict(raw: dict, base_dir=".") -> RunConfig:
    if not isinstance(raw, dict):
        raise InputError("run config must be a JSON object")
    extra = set(raw) - _KEYS
    if extra:
        raise InputError(f"unknown config keys: {sorted(extra)}")
    grid = raw.get("grid", {})
    try:
        return RunConfig(
            divergence=raw.get("divergence", {"family": "quadratic"}),
            sites=raw.get("sites", {}),
            rect=tuple(float(x) for x in grid.get("rect", (0, 0, 1, 1))),
            dims=tuple(int(x) for x in grid.get("dims", (256, 256))),
            seed=int(raw.get("seed", 0)),
            samples=int(raw.get("samples", 1000)),
            parallel=bool(raw.get("parallel", False)),
            base_dir=Path(base_dir),
        )
    except (TypeError, ValueError, AttributeError) as exc:
        raise InputError(f"malformed run config: {exc}") from exc


def load_run_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(raw, path.parent)


def make_sites(cfg: RunConfig, d: Divergence) -> SiteSet:
    """Sites from ``points``, ``path``, ``random`` or ``epsilon_net``."""
    s = cfg.sites
    if "points" in s:
        return SiteSet(np.asarray(s["points"], dtype=float))
    if "path" in s:
        p = Path(s["path"])
        return load_sites(p if p.is_absolute() else cfg.base_dir / p)
    if "random" in s:
        r = s["random"]
        return generate_random(r.get("rect", cfg.rect), int(r["n"]), cfg.seed)
    if "epsilon_net" in s:
        r = s["epsilon_net"]
        sigma = sigma_surrogate(d.metric) if isinstance(d.metric, MetricField) else 0.0
        params = NetParams(float(r["epsilon"]), sigma, cfg.seed)
        return generate_epsilon_net(d, r.get("rect", cfg.rect), params,
                                    tuple(r.get("probe", (65, 65))),
                                    bool(r.get("require_guarantee", False)),
                                    bool(r.get("disk", False)))
    raise InputError("sites config needs one of: points, path, random, epsilon_net")


@dataclass(eq=False)
class Run:
    d: Divergence
    sites: SiteSet
    grid: LabelGrid
    elements: list
    dag: object
    absorbed: list
    orphan: dict
    dual: DualTriangulation
    config: RunConfig | None = None

    def verify(self, samples: int = 1000, seed: int = 0, n_forms: int = 20) -> VerificationReport:
        return verify(self.dual, self.d, self.sites, elements=self.elements, dag=self.dag,
                      orphan=self.orphan, absorbed=self.absorbed, samples=samples,
                      seed=seed, n_forms=n_forms)


def full_orphan_check(grid: LabelGrid, d: Divergence, sites: SiteSet, elements) -> dict:
    """Orphan check of the propagated labels and of the exact argmin labelling.

    Propagated regions are connected by construction, so the argmin labels
    are what can reveal orphans. Splits that close up through near-tie
    vertices (one grid step) are lattice aliasing and reported separately.
    """
    rep = orphan_check(elements, len(sites))
    mism = grid.mismatches
    rep["mismatches"] = mism
    rep["resolution_splits"] = []
    if mism:
        counts = lattice_components(grid.geometry, grid.argmin)
        orphans = []
        for k in range(len(sites)):
            c = counts.get(k, 0)
            if c <= 1:
                continue
            b = bridged_components(grid.geometry, d, sites, grid.argmin, k)
            entry = {"site": k, "components": c, "bridged_components": b}
            (orphans if b > 1 else rep["resolution_splits"]).append(entry)
        missing = [k for k in range(len(sites)) if counts.get(k, 0) == 0]
        rep["argmin"] = {"orphans": orphans, "missing_sites": missing}
        rep["orphan_free"] = rep["orphan_free"] and not orphans and not missing
    return rep


def from_grid(d: Divergence, sites: SiteSet, grid: LabelGrid, config=None) -> Run:
    """Elements, incidence, orphan report and dual for an existing labelling."""
    elements = extract_elements(grid, d, sites)
    dag = build_incidence(elements)
    orphan = full_orphan_check(grid, d, sites, elements)
    elements, dag, absorbed = discard_isolated_edges(elements, dag)
    dual = build_dual(build_primal_graph(elements, dag, sites), sites, d)
    dual.warnings.extend(elements.warnings)
    if not elements.grid_covers_hull:
        dual.warnings.append("grid does not contain the inflated site bounding box; "
                             "unbounded elements are not marked")
    return Run(d, sites, grid, elements, dag, absorbed, orphan, dual, config)


def build(d: Divergence, sites: SiteSet, geom: GridGeometry, *, parallel: bool = False,
          exhaustive: bool = True, config=None) -> Run:
    grid = build_label_grid(d, sites, geom, parallel=parallel, exhaustive=exhaustive)
    return from_grid(d, sites, grid, config)


def run_config(cfg: RunConfig) -> Run:
    d = from_config(cfg.divergence, cfg.base_dir)
    sites = make_sites(cfg, d)
    geom = GridGeometry.from_rect(cfg.rect, cfg.dims)
    return build(d, sites, geom, parallel=cfg.parallel, config=cfg)
