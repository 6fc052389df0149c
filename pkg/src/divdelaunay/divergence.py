"""Divergences D(p || q) on the plane.

Four families are built in: quadratic (a metric field Q), Bregman (built-in
potentials), Lp norms and Csiszar f-divergences on the 3-atom simplex.
Values come from :mod:`divdelaunay._kernels`; gradients in the second
argument are closed form where available, central differences otherwise.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import _kernels as K
from .errors import DomainError, InputError, InvalidDivergence, UnsupportedError
from .metric_field import MetricField, eigen_ratio, load_metric_field

CSISZAR_DELTA = 1e-9

_METRICS = {"identity": K.METRIC_IDENTITY, "constant": K.METRIC_CONSTANT,
            "sampled": K.METRIC_SAMPLED, "rotating": K.METRIC_ROTATING,
            "sheared": K.METRIC_SHEARED}
_POTENTIALS = {"half_sq_norm": K.POTENTIAL_HALF_SQ, "xlogx_sum": K.POTENTIAL_XLOGX}
_FFUNCS = {"hellinger": K.F_HELLINGER, "kl": K.F_KL}
_DUMMY_FIELD = np.ones((2, 2, 3))
_DUMMY_FGEOM = np.array([0.0, 0.0, 1.0, 1.0, 2.0, 2.0])


@dataclass(frozen=True, eq=False)
class Divergence:
    """A divergence, strictly convex in the first argument and C1 in the second.

    Build instances with :func:`quadratic`, :func:`bregman`, :func:`lp`,
    :func:`csiszar` or :func:`from_config`.
    """

    family: str
    kind: str
    params: np.ndarray = field(repr=False)
    metric: MetricField | None = field(default=None, repr=False)
    config: dict = field(default_factory=dict, repr=False)

    @property
    def fam(self) -> int:
        return {"quadratic": K.FAM_QUADRATIC, "bregman": K.FAM_BREGMAN,
                "lp": K.FAM_LP, "csiszar": K.FAM_CSISZAR}[self.family]

    @property
    def sub(self) -> int:
        table = {"quadratic": _METRICS, "bregman": _POTENTIALS, "csiszar": _FFUNCS}
        return table.get(self.family, {}).get(self.kind, 0)

    @property
    def kernel(self):
        """Packed arguments for the numba kernels."""
        if self.metric is not None:
            return self.fam, self.sub, self.params, self.metric.samples, self.metric.fgeom
        return self.fam, self.sub, self.params, _DUMMY_FIELD, _DUMMY_FGEOM

    @property
    def has_closed_form_gradient(self) -> bool:
        return not (self.family == "quadratic" and self.kind == "sampled")

    # -- domain ----------------------------------------------------------
    def in_domain(self, p) -> bool:
        x, y = float(p[0]), float(p[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            return False
        if self.family == "csiszar":
            d = CSISZAR_DELTA
            return x > d and y > d and x + y < 1.0 - d
        if self.family == "bregman" and self.kind == "xlogx_sum":
            return x > 0 and y > 0
        return True

    def check_domain(self, *pts) -> None:
        for p in pts:
            if not self.in_domain(p):
                raise DomainError(f"point {tuple(map(float, p))} outside the domain of {self.family}:{self.kind}")

    # -- evaluation -------------------------------------------------------
    def eval(self, p, q) -> float:
        """D(p || q)."""
        self.check_domain(p, q)
        fam, sub, params, fld, fg = self.kernel
        return float(K.eval_pair(fam, sub, params, fld, fg, float(p[0]), float(p[1]),
                                 float(q[0]), float(q[1])))

    def eval_to_points(self, s, points) -> np.ndarray:
        """D(s || v) for every row v of ``points``."""
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        fam, sub, params, fld, fg = self.kernel
        xs = np.ascontiguousarray(pts[:, 0])
        ys = np.ascontiguousarray(pts[:, 1])
        aux = K.points_aux(fam, sub, params, fld, fg, xs, ys)
        sb = K.site_aux(fam, sub, float(s[0]), float(s[1]))
        return K.eval_site_to_points(fam, sub, params, float(s[0]), float(s[1]), sb, xs, ys, aux)

    def eval_from_points(self, sites, q) -> np.ndarray:
        """D(s || q) for every row s of ``sites``."""
        pts = np.asarray(sites, dtype=float).reshape(-1, 2)
        fam, sub, params, fld, fg = self.kernel
        return K.eval_points_to_point(fam, sub, params, fld, fg,
                                      np.ascontiguousarray(pts[:, 0]),
                                      np.ascontiguousarray(pts[:, 1]),
                                      float(q[0]), float(q[1]))

    # -- second-order information ----------------------------------------
    def metric_at(self, q) -> np.ndarray:
        """Q(q) for quadratic divergences."""
        if self.family != "quadratic":
            raise UnsupportedError("metric_at is defined for quadratic divergences only")
        fam, sub, params, fld, fg = self.kernel
        q11, q12, q22 = K.closed_metric(sub, params, fld, fg, float(q[0]), float(q[1]))
        return np.array([[q11, q12], [q12, q22]])

    def hessian(self, q) -> np.ndarray:
        """Hessian of the Bregman potential at q."""
        if self.family != "bregman":
            raise UnsupportedError("hessian is defined for bregman divergences only")
        self.check_domain(q)
        if self.kind == "half_sq_norm":
            return np.eye(2)
        return np.diag([1.0 / q[0], 1.0 / q[1]])

    def _metric_derivs(self, q):
        x, y = float(q[0]), float(q[1])
        zero = np.zeros((2, 2))
        if self.kind in ("identity", "constant"):
            return zero, zero
        if self.kind == "rotating":
            c, s = math.cos(x), math.sin(x)
            # d/dx of [[c^2+4s^2, -3cs], [-3cs, s^2+4c^2]]
            d11 = 6.0 * c * s
            d12 = -3.0 * (c * c - s * s)
            return np.array([[d11, d12], [d12, -d11]]), zero
        if self.kind == "sheared":
            dk = 0.8 * 2.0 * math.pi * math.cos(2.0 * math.pi * y)
            return zero, np.array([[0.0, dk], [dk, 0.0]])
        raise UnsupportedError(f"no closed-form metric derivative for {self.kind}")

    def grad2(self, s, p, *, finite_difference: bool = False) -> np.ndarray:
        """Gradient of D(s || p) with respect to p (the EGA check negates it)."""
        s = np.asarray(s, dtype=float)
        p = np.asarray(p, dtype=float)
        self.check_domain(s, p)
        if finite_difference or not self.has_closed_form_gradient:
            return self._grad2_fd(s, p)
        d = s - p
        if self.family == "quadratic":
            Q = self.metric_at(p)
            D = math.sqrt(max(float(d @ Q @ d), 0.0))
            if D == 0.0:
                return np.zeros(2)
            Qx, Qy = self._metric_derivs(p)
            return (-2.0 * (Q @ d) + np.array([d @ Qx @ d, d @ Qy @ d])) / (2.0 * D)
        if self.family == "bregman":
            return self.hessian(p) @ (p - s)
        if self.family == "lp":
            e = float(self.params[0])
            D = float(np.sum(np.abs(d) ** e) ** (1.0 / e))
            if D == 0.0:
                return np.zeros(2)
            return -np.sign(d) * np.abs(d) ** (e - 1.0) / D ** (e - 1.0)
        # csiszar: dD/dmu_i = f(t_i) - t_i f'(t_i), t_i = rho_i / mu_i
        rho = np.array([s[0], s[1], 1.0 - s[0] - s[1]])
        mu = np.array([p[0], p[1], 1.0 - p[0] - p[1]])
        t = rho / mu
        if self.kind == "hellinger":
            g = (np.sqrt(t) - 1.0) ** 2 - t * (np.sqrt(t) - 1.0) / np.sqrt(t)
        else:
            g = -t
        return np.array([g[0] - g[2], g[1] - g[2]])

    def _grad2_fd(self, s, p) -> np.ndarray:
        h = 1e-5 * (1.0 + float(np.hypot(p[0], p[1])))
        out = np.empty(2)
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            out[k] = (self.eval(s, p + e) - self.eval(s, p - e)) / (2.0 * h)
        return out


# -- constructors -------------------------------------------------------------

def quadratic(metric: str | MetricField | np.ndarray = "identity") -> Divergence:
    """D_Q(p||q) = sqrt((p-q)^T Q(q) (p-q)) for a named, constant or sampled metric."""
    params = np.zeros(8)
    if isinstance(metric, MetricField):
        return Divergence("quadratic", "sampled", params, metric, {"family": "quadratic"})
    if isinstance(metric, str):
        if metric not in _METRICS or metric in ("sampled", "constant"):
            raise InputError(f"unknown closed-form metric {metric!r}")
        return Divergence("quadratic", metric, params, None,
                          {"family": "quadratic", "metric": {"kind": metric}})
    q = np.asarray(metric, dtype=float)
    if q.shape != (2, 2) or abs(q[0, 1] - q[1, 0]) > 0:
        raise InvalidDivergence("constant metric must be a symmetric 2x2 matrix")
    if not (q[0, 0] > 0 and q[0, 0] * q[1, 1] - q[0, 1] ** 2 > 0):
        raise InvalidDivergence("constant metric is not positive definite")
    params[1:4] = q[0, 0], q[0, 1], q[1, 1]
    return Divergence("quadratic", "constant", params, None,
                      {"family": "quadratic", "metric": {"kind": "constant", "q": [q[0, 0], q[0, 1], q[1, 1]]}})


def bregman(potential: str = "half_sq_norm") -> Divergence:
    if potential not in _POTENTIALS:
        raise InputError(f"unknown potential {potential!r}")
    return Divergence("bregman", potential, np.zeros(8), None,
                      {"family": "bregman", "potential": potential})


def lp(p: float) -> Divergence:
    p = float(p)
    if not (1.0 < p < math.inf):
        raise InvalidDivergence(f"lp exponent must satisfy 1 < p < inf, got {p}")
    params = np.zeros(8)
    params[0] = p
    return Divergence("lp", "norm", params, None, {"family": "lp", "p": p})


def csiszar(f: str = "hellinger") -> Divergence:
    if f not in _FFUNCS:
        raise InputError(f"unknown f-function {f!r}")
    return Divergence("csiszar", f, np.zeros(8), None, {"family": "csiszar", "f": f})


_ALLOWED = {
    "quadratic": {"family", "metric"},
    "bregman": {"family", "potential"},
    "lp": {"family", "p"},
    "csiszar": {"family", "f"},
}


def from_config(cfg: dict[str, Any], base_dir: str | Path | None = None) -> Divergence:
    """Build a divergence from its JSON configuration; unknown keys are rejected."""
    if not isinstance(cfg, dict) or "family" not in cfg:
        raise InputError("divergence config must be an object with a 'family' key")
    fam = cfg["family"]
    if fam not in _ALLOWED:
        raise InputError(f"unknown divergence family {fam!r}")
    extra = set(cfg) - _ALLOWED[fam]
    if extra:
        raise InputError(f"unknown keys for {fam} divergence: {sorted(extra)}")
    if fam == "lp":
        if "p" not in cfg:
            raise InputError("lp divergence needs 'p'")
        return lp(cfg["p"])
    if fam == "bregman":
        return bregman(cfg.get("potential", "half_sq_norm"))
    if fam == "csiszar":
        return csiszar(cfg.get("f", "hellinger"))
    m = cfg.get("metric", {"kind": "identity"})
    if not isinstance(m, dict) or "kind" not in m:
        raise InputError("metric must be an object with a 'kind' key")
    kind = m["kind"]
    allowed = {"kind", "path"} if kind == "sampled" else {"kind", "q"} if kind == "constant" else {"kind"}
    extra = set(m) - allowed
    if extra:
        raise InputError(f"unknown keys for metric {kind!r}: {sorted(extra)}")
    if kind == "sampled":
        if "path" not in m:
            raise InputError("sampled metric needs 'path'")
        path = Path(m["path"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        d = quadratic(load_metric_field(path))
        d.config.update({"metric": {"kind": "sampled", "path": str(path.resolve())}})
        return d
    if kind == "constant":
        q = m.get("q")
        if q is None or len(q) != 3:
            raise InputError("constant metric needs 'q': [q11, q12, q22]")
        return quadratic(np.array([[q[0], q[1]], [q[1], q[2]]], dtype=float))
    return quadratic(kind)


def load_config(path) -> Divergence:
    path = Path(path)
    try:
        cfg = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read divergence config {path}: {exc}") from exc
    return from_config(cfg, base_dir=path.parent)


# -- module-level operations ------------------------------------------------

def eval(d: Divergence, p, q) -> float:  # noqa: A001 - mirrors D(p||q)
    return d.eval(p, q)


def grad2(d: Divergence, s, p, *, finite_difference: bool = False) -> np.ndarray:
    return d.grad2(s, p, finite_difference=finite_difference)


def _sample_region(region, samples):
    x0, y0, x1, y1 = region
    k = max(2, int(math.ceil(math.sqrt(samples))))
    xs, ys = np.meshgrid(np.linspace(x0, x1, k), np.linspace(y0, y1, k))
    return np.column_stack([xs.ravel(), ys.ravel()])


def anisotropy_ratio(d: Divergence, region, samples: int = 400) -> float:
    """Sampled minimum of lambda_min / lambda_max of Q or of the potential Hessian.

    Lp norms return 1.0; bounded anisotropy holds for them without a ratio.
    """
    if d.family == "lp":
        return 1.0
    if d.family not in ("quadratic", "bregman"):
        raise UnsupportedError(f"anisotropy_ratio is not defined for {d.family}")
    pts = _sample_region(region, samples)
    mats = np.array([d.metric_at(p) if d.family == "quadratic" else d.hessian(p) for p in pts])
    q11, q12, q22 = mats[:, 0, 0], mats[:, 0, 1], mats[:, 1, 1]
    if np.any(q11 <= 0) or np.any(q11 * q22 - q12 * q12 <= 0):
        raise InvalidDivergence("non-SPD matrix encountered while sampling anisotropy")
    return float(np.min(eigen_ratio(q11, q12, q22)))


def anisotropy_certificate(d: Divergence, region, samples: int = 400) -> dict:
    if d.family == "lp":
        return {"gamma": 1.0, "kind": "automatic"}
    return {"gamma": anisotropy_ratio(d, region, samples), "kind": "sampled certificate"}


@dataclass(frozen=True)
class BallFirstKind:
    """{v : D(v || center) <= radius}."""

    divergence: Divergence
    center: tuple[float, float]
    radius: float

    def contains(self, v) -> bool:
        return self.divergence.eval(v, self.center) <= self.radius


def ball_through(d: Divergence, center, boundary_pt) -> BallFirstKind:
    c = (float(center[0]), float(center[1]))
    return BallFirstKind(d, c, d.eval(boundary_pt, c))
