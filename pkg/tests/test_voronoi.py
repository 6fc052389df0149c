import numpy as np
import pytest
from scipy import ndimage
from hypothesis import given, settings, strategies as st

from divdelaunay import bregman, quadratic
from divdelaunay.errors import InputError, ResolutionError
from divdelaunay.sites import SiteSet, generate_random
from divdelaunay.voronoi import (INF, GridGeometry, LabelGrid, build_incidence, build_label_grid,
                                 discard_isolated_edges, ega_check, extract_elements, incidence_arity,
                                 orphan_check, refine_vertex)

from oracles import circumcenter

G128 = GridGeometry.from_rect((0, 0, 1, 1), (128, 128))
G256 = GridGeometry.from_rect((0, 0, 1, 1), (256, 256))


def brute_labels(geom, pts):
    xy = geom.vertex_xy(np.arange(geom.n_vertices))
    dist = np.hypot(xy[:, None, 0] - pts[None, :, 0], xy[:, None, 1] - pts[None, :, 1])
    return np.argmin(dist, axis=1).reshape(geom.dims[1], geom.dims[0])


SIX = np.array([[1, 1, 0], [1, 1, 1], [0, 1, 1]])  # lattice neighbours incl. the SW-NE diagonal


def seed_fragments(labels, seeds):
    """Mask of vertices whose argmin component does not contain that site's seed."""
    out = np.zeros(labels.shape, dtype=bool)
    flat_seeds = np.asarray(seeds)
    for k in np.unique(labels):
        comp, _ = ndimage.label(labels == k, structure=SIX)
        j, i = divmod(int(flat_seeds[k]), labels.shape[1])
        out |= (labels == k) & (comp != comp[j, i])
    return out


def grid_edge_count(w, h):
    return (w - 1) * h + w * (h - 1) + (w - 1) * (h - 1)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 10), st.integers(0, 10**6))
def test_propagation_equals_brute_argmin(n, seed):
    sites = generate_random((0.05, 0.05, 0.95, 0.95), n, seed)
    try:
        g = build_label_grid(quadratic(), sites, G128)
    except ResolutionError:
        return
    brute = brute_labels(G128, sites.points)
    assert np.array_equal(g.argmin, brute)
    # a lattice front only reaches vertices 6-connected to the seed through its own
    # argmin region; everywhere else the labels must agree exactly
    cut = seed_fragments(brute, g.seeds)
    assert np.array_equal(g.label[~cut], brute[~cut])


@settings(max_examples=10, deadline=None)
@given(st.integers(2, 12), st.integers(0, 10**6))
def test_parallel_mode_is_bitwise_identical(n, seed):
    d = quadratic("rotating")
    sites = generate_random((0.1, 0.1, 0.9, 0.9), n, seed)
    try:
        a = build_label_grid(d, sites, G128)
    except ResolutionError:
        return
    b = build_label_grid(d, sites, G128, parallel=True)
    assert np.array_equal(a.label, b.label) and np.array_equal(a.value, b.value)
    assert np.array_equal(a.argmin, b.argmin) and a.counters == b.counters


def test_counters():
    g = build_label_grid(quadratic(), generate_random((0.2, 0.2, 0.8, 0.8), 5, 1), G256)
    c = g.counters
    v = G256.n_vertices
    assert c["finalize"] == v
    assert c["relax"] == 6 * v
    assert c["relax_in_grid"] == grid_edge_count(256, 256)
    assert c["max_received"] <= 6


def test_grid_errors():
    with pytest.raises(ResolutionError):
        build_label_grid(quadratic(), SiteSet(np.array([[0.5, 0.5], [0.5001, 0.5]])), G128)
    with pytest.raises(InputError):
        build_label_grid(quadratic(), SiteSet(np.array([[0.5, 0.5], [1.5, 0.5]])), G128)


def _run(pts, geom=G256, d=None):
    d = d or quadratic()
    sites = SiteSet(np.asarray(pts, dtype=float))
    g = build_label_grid(d, sites, geom)
    els = extract_elements(g, d, sites)
    return sites, g, els, build_incidence(els)


def test_equilateral_vertex_at_circumcenter():
    h = np.sqrt(3) / 2 * 0.4
    pts = [(0.3, 0.4), (0.7, 0.4), (0.5, 0.4 + h)]
    _, _, els, _ = _run(pts)
    verts = [el for el in els if el.order >= 3]
    assert len(verts) == 1 and verts[0].I == (0, 1, 2)
    o, _ = circumcenter(*pts)
    assert np.hypot(*(verts[0].location - o)) < 1e-9


def test_three_site_incidence_pattern():
    _, _, els, dag = _run([(0.35, 0.4), (0.65, 0.42), (0.5, 0.62)])
    regions = [k for k, el in enumerate(els) if el.order == 1]
    edges = [k for k, el in enumerate(els) if el.order == 2]
    (vertex,) = [k for k, el in enumerate(els) if el.order == 3]
    assert len(regions) == 3 and len(edges) == 3
    arcs = set(dag.arcs)
    for e in edges:
        assert sorted(els[e].ends) == [INF, vertex]
        for r in regions:
            assert ((r, e) in arcs) == (els[r].I[0] in els[e].I)
        assert (e, vertex) in arcs
    assert all((r, vertex) in arcs for r in regions)
    assert dag.is_acyclic()
    assert incidence_arity(els, dag)["pass"]


def test_two_sites_single_unbounded_edge():
    _, _, els, _ = _run([(0.4, 0.45), (0.6, 0.55)])
    edges = [el for el in els if el.order == 2]
    assert len(edges) == 1 and edges[0].ends == [INF, INF] and edges[0].at_infinity
    assert not [el for el in els if el.order >= 3]


def test_colinear_sites_have_no_vertices():
    _, _, els, _ = _run([(0.375, 0.5), (0.5, 0.5), (0.625, 0.5), (0.4375, 0.5)])
    assert not [el for el in els if el.order >= 3]
    assert sorted(el.I for el in els if el.order == 2) == [(0, 3), (1, 2), (1, 3)]


def test_co_circular_square_merges_into_one_vertex():
    _, _, els, _ = _run([(0.4, 0.4), (0.6, 0.4), (0.6, 0.6), (0.4, 0.6)])
    verts = [el for el in els if el.order >= 3]
    assert len(verts) == 1 and verts[0].I == (0, 1, 2, 3)
    assert np.allclose(verts[0].location, (0.5, 0.5), atol=1e-9)
    assert sum(el.order == 2 for el in els) == 4


def test_planted_orphan_is_reported():
    geom = GridGeometry.from_rect((0, 0, 1, 1), (32, 32))
    lab = np.zeros((32, 32), dtype=np.int64)
    lab[:, 16:] = 1
    lab[4:8, 20:24] = 0  # a detached piece of region 0
    sites = SiteSet(np.array([[0.2, 0.5], [0.8, 0.5]]))
    grid = LabelGrid(geom, lab, np.zeros(lab.shape), {})
    els = extract_elements(grid, quadratic(), sites)
    rep = orphan_check(els, 2)
    assert not rep["orphan_free"]
    assert rep["orphans"] == [{"site": 0, "components": 2}]


def test_isolated_loop_is_absorbed():
    geom = GridGeometry.from_rect((0, 0, 1, 1), (32, 32))
    lab = np.zeros((32, 32), dtype=np.int64)
    lab[12:20, 12:20] = 1  # region 1 enclosed by region 0
    sites = SiteSet(np.array([[0.2, 0.2], [0.5, 0.5]]))
    grid = LabelGrid(geom, lab, np.zeros(lab.shape), {})
    els = extract_elements(grid, quadratic(), sites)
    dag = build_incidence(els)
    before = sorted(el.I for el in els)
    kept, dag2, absorbed = discard_isolated_edges(els, dag)
    assert absorbed == [{"I": [0, 1], "container": 0}]
    assert sorted(el.I for el in kept) == [I for I in before if I != (0, 1)]
    assert incidence_arity(kept, dag2)["pass"]


@settings(max_examples=10, deadline=None)
@given(st.integers(3, 9), st.integers(0, 10**6))
def test_discard_leaves_other_elements_alone(n, seed):
    sites = generate_random((0.3, 0.3, 0.7, 0.7), n, seed)
    try:
        g = build_label_grid(quadratic(), sites, G256, exhaustive=False)
    except ResolutionError:
        return
    els = extract_elements(g, quadratic(), sites)
    before = sorted((el.order, el.I) for el in els)
    kept, _, absorbed = discard_isolated_edges(els, build_incidence(els))
    gone = sorted((2, tuple(a["I"])) for a in absorbed)
    after = sorted((el.order, el.I) for el in kept)
    assert sorted(after + gone) == before


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_refined_vertex_is_equidistant(seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.2, 0.8, (3, 2))
    o, r = circumcenter(*pts)
    if not (np.all(np.abs(o - 0.5) < 1.0) and r < 1.0):
        return
    start = o + rng.normal(0, 0.002, 2)
    p, ok = refine_vertex(quadratic(), SiteSet(pts), (0, 1, 2), start, 0.01)
    assert ok
    assert np.hypot(*(p - o)) < 1e-8 * (1 + r)


def test_ega_examples():
    d = bregman("half_sq_norm")
    pts = SiteSet(np.array([[0.0, 0.0], [1.0, 0.0], [0.2, 0.9]]))
    o, _ = circumcenter(*pts.points)
    assert ega_check(d, pts, ((0, 1, 2), o))["pass"]
    line = SiteSet(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))
    res = ega_check(d, line, ((0, 1, 2), (1.0, 5.0)))
    assert not res["pass"] and any("not extremal" in r for r in res["reasons"])


@given(st.tuples(*[st.integers(-3, 3)] * 6))
def test_ega_fails_exactly_for_colinear_gradients(c):
    pts = np.array(c, dtype=float).reshape(3, 2)
    if len(np.unique(pts, axis=0)) < 3:
        return
    # half squared norm: -grad = s - p, so the gradients are the sites shifted by p
    res = ega_check(bregman("half_sq_norm"), SiteSet(pts), ((0, 1, 2), (0.25, 0.5)))
    (ax, ay), (bx, by), (cx, cy) = pts
    colinear = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax) == 0
    assert res["pass"] == (not colinear)
