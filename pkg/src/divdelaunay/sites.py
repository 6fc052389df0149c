"""Site sets: seeded random placement and asymmetric epsilon-nets."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .divergence import Divergence
from .errors import CapacityError, InputError, UnsupportedError
from .geometry import HullChain, convex_hull
from .metric_field import MetricField

SIGMA_EPS_BOUND = 0.098
NET_SITE_CAP = 100_000


@dataclass(frozen=True, eq=False)
class SiteSet:
    """Ordered distinct sites; the index of a site is its id."""

    points: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 2)
        if len(pts) == 0:
            raise InputError("a site set needs at least one site")
        if not np.all(np.isfinite(pts)):
            raise InputError("site coordinates must be finite")
        if len(np.unique(pts, axis=0)) != len(pts):
            raise InputError("sites must be pairwise distinct")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def __getitem__(self, k):
        return self.points[k]

    @cached_property
    def hull(self) -> HullChain:
        return convex_hull(self.points)

    @property
    def hull_order(self) -> tuple[int, ...]:
        return self.hull.boundary


def generate_random(rect, n: int, seed: int) -> SiteSet:
    """n uniform sites in ``rect = (x0, y0, x1, y1)``, separated by at least 1e-6 of the diagonal."""
    if n < 1:
        raise InputError("n must be at least 1")
    x0, y0, x1, y1 = map(float, rect)
    sep = 1e-6 * float(np.hypot(x1 - x0, y1 - y0))
    rng = np.random.default_rng(seed)
    pts = np.empty((n, 2))
    k = 0
    attempts = 0
    while k < n:
        attempts += 1
        if attempts > 1000 * n + 1000:
            raise CapacityError(f"could not place {n} distinct sites in {rect}")
        p = rng.uniform((x0, y0), (x1, y1))
        if k and np.min(np.hypot(*(pts[:k] - p).T)) < sep:
            continue
        pts[k] = p
        k += 1
    return SiteSet(pts, {"generator": "random", "seed": seed})


@dataclass(frozen=True)
class NetParams:
    epsilon: float
    sigma_surrogate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InputError("epsilon must be positive")
        if self.sigma_surrogate < 0:
            raise InputError("sigma_surrogate must be nonnegative")

    @property
    def product(self) -> float:
        return self.epsilon * self.sigma_surrogate

    @property
    def guaranteed(self) -> bool:
        """epsilon * sigma <= 0.098, judged with the surrogate sigma."""
        return self.product <= SIGMA_EPS_BOUND


def _probe_lattice(rect, dims, disk=False):
    x0, y0, x1, y1 = rect
    w, h = dims
    xs, ys = np.meshgrid(np.linspace(x0, x1, w), np.linspace(y0, y1, h))
    pts = np.column_stack([xs.ravel(), ys.ravel()])
    if disk:  # ellipse inscribed in the rectangle
        u = (pts[:, 0] - 0.5 * (x0 + x1)) / (0.5 * (x1 - x0))
        v = (pts[:, 1] - 0.5 * (y0 + y1)) / (0.5 * (y1 - y0))
        pts = pts[u * u + v * v <= 1.0]
    return pts


def generate_epsilon_net(d: Divergence, rect, params: NetParams, probe_dims=(65, 65),
                         require_guarantee: bool = False, disk: bool = False) -> SiteSet:
    """Greedy farthest-point asymmetric epsilon-net under D_Q(s || p).

    Coverage is measured as min_s D(s || p) over the probe lattice. Every new
    site is a probe farther than epsilon from all earlier sites, so packing
    holds in the order D(earlier || later) >= epsilon. With ``disk`` the
    probes are restricted to the ellipse inscribed in ``rect``, which keeps
    the hull free of long colinear runs.
    """
    if d.family != "quadratic":
        raise UnsupportedError("epsilon-nets are generated for quadratic divergences only")
    if require_guarantee and not params.guaranteed:
        raise InputError(f"epsilon*sigma = {params.product:.4g} exceeds {SIGMA_EPS_BOUND}")
    probes = _probe_lattice(rect, probe_dims, disk)
    rng = np.random.default_rng(params.seed)
    first = int(rng.integers(len(probes)))
    chosen = [first]
    cover = d.eval_to_points(probes[first], probes)
    while True:
        far = int(np.argmax(cover))  # first maximum: deterministic
        if cover[far] <= params.epsilon:
            break
        if len(chosen) >= NET_SITE_CAP:
            raise CapacityError("epsilon-net did not converge within the site cap")
        chosen.append(far)
        np.minimum(cover, d.eval_to_points(probes[far], probes), out=cover)
    meta = {"generator": "epsilon_net", "epsilon": params.epsilon, "disk": disk,
            "sigma_surrogate": params.sigma_surrogate, "seed": params.seed,
            "covering_radius": float(cover.max()),
            "certificate": "surrogate certificate" if params.guaranteed else "none"}
    return SiteSet(probes[chosen], meta)


def _sqrt_spd(q11, q12, q22):
    sd = np.sqrt(q11 * q22 - q12 * q12)
    t = np.sqrt(q11 + q22 + 2.0 * sd)
    return (q11 + sd) / t, q12 / t, (q22 + sd) / t


def _sym_norm(m11, m12, m22):
    return np.abs(0.5 * (m11 + m22)) + np.sqrt(0.25 * (m11 - m22) ** 2 + m12 ** 2)


def sigma_surrogate(mf: MetricField) -> float:
    """Largest finite-difference variation of Q^(1/2) between adjacent nodes.

    A stand-in for the variation bound sigma of the epsilon-net guarantee,
    whose exact definition is not reproduced here.
    """
    r11, r12, r22 = _sqrt_spd(mf.samples[..., 0], mf.samples[..., 1], mf.samples[..., 2])
    dx, dy = mf.spacing
    gx = _sym_norm(np.diff(r11, axis=1), np.diff(r12, axis=1), np.diff(r22, axis=1)) / dx
    gy = _sym_norm(np.diff(r11, axis=0), np.diff(r12, axis=0), np.diff(r22, axis=0)) / dy
    return float(max(gx.max(initial=0.0), gy.max(initial=0.0)))


def load_sites(path) -> SiteSet:
    """Read ``x y`` per line; ``#`` starts a comment."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read sites file {path}: {exc}") from exc
    pts = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InputError(f"{path}:{lineno}: expected 'x y'")
        try:
            pts.append((float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from exc
    return SiteSet(np.array(pts))


def save_sites(sites: SiteSet, path, header: str | None = None) -> None:
    lines = [f"# {h}" for h in (header or "").splitlines() if h]
    lines += [f"{float(x)!r} {float(y)!r}" for x, y in sites.points]
    Path(path).write_text("\n".join(lines) + "\n")
