"""Seeded run collections shared by several tests (built once per session)."""
from __future__ import annotations

import time
from functools import lru_cache

import numpy as np

from divdelaunay import quadratic
from divdelaunay.metric_field import MetricField
from divdelaunay.pipeline import build
from divdelaunay.sites import NetParams, SiteSet, generate_epsilon_net, sigma_surrogate
from divdelaunay.voronoi import GridGeometry

from oracles import general_position_sites

EUCLID_INSTANCES = 50
EUCLID_GRID = GridGeometry.from_rect((0.0, 0.0, 1.0, 1.0), (512, 512))

NET_SEEDS = 10
NET_EPSILON = 0.09
NET_RECT = (0.25, 0.375, 0.75, 0.625)  # ellipse 0.25 x 0.125: round under diag(1, 4)
NET_GRID = GridGeometry.from_rect((-0.5, -0.5, 1.5, 1.5), (512, 512))


def bump_metric(x, y, amp=0.2, radius=0.3):
    """diag(1, 4) turned by a smooth angle bump centred at (0.5, 0.5)."""
    r2 = ((x - 0.5) ** 2 + (y - 0.5) ** 2) / radius ** 2
    t = amp * (1.0 - r2) ** 2 if r2 < 1.0 else 0.0
    c, s = np.cos(t), np.sin(t)
    R = np.array([[c, -s], [s, c]])
    return R @ np.diag([1.0, 4.0]) @ R.T


@lru_cache(maxsize=None)
def bump_field() -> MetricField:
    return MetricField.from_function(bump_metric, (0.0, 0.0, 1.0, 1.0), (129, 129))


@lru_cache(maxsize=None)
def euclid_suite():
    """(runs, seconds): 50 general-position instances with 4..12 sites."""
    d = quadratic()
    t0 = time.perf_counter()
    runs = []
    for k in range(EUCLID_INSTANCES):
        pts = general_position_sites(k, 4 + k % 9)
        runs.append(build(d, SiteSet(pts), EUCLID_GRID, exhaustive=False))
    return runs, time.perf_counter() - t0


@lru_cache(maxsize=None)
def net_suite():
    """(runs, sigma): ten seeded epsilon-nets under the bump metric."""
    mf = bump_field()
    d = quadratic(mf)
    sigma = sigma_surrogate(mf)
    runs = []
    for seed in range(NET_SEEDS):
        sites = generate_epsilon_net(d, NET_RECT, NetParams(NET_EPSILON, sigma, seed), disk=True)
        runs.append(build(d, sites, NET_GRID))
    return runs, sigma


@lru_cache(maxsize=None)
def reports(which: str):
    runs = euclid_suite()[0] if which == "euclid" else net_suite()[0]
    return [run.verify(samples=1000, seed=k, n_forms=20) for k, run in enumerate(runs)]
