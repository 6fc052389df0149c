"""Metric tensors sampled on a regular grid, bilinearly interpolated."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels as K
from .errors import InputError


def _spd_ok(q11, q12, q22):
    return (q11 > 0) & (q11 * q22 - q12 * q12 > 0)


@dataclass(frozen=True, eq=False)
class MetricField:
    """SPD metric samples ``(q11, q12, q22)`` on a W x H node lattice.

    ``samples[j, i]`` is the node at ``origin + (i*dx, j*dy)``.
    """

    origin: tuple[float, float]
    spacing: tuple[float, float]
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = np.ascontiguousarray(self.samples, dtype=float)
        if s.ndim != 3 or s.shape[2] != 3:
            raise InputError(f"samples must have shape (H, W, 3), got {s.shape}")
        if s.shape[0] < 2 or s.shape[1] < 2:
            raise InputError("metric field needs at least 2x2 nodes")
        if self.spacing[0] <= 0 or self.spacing[1] <= 0:
            raise InputError("metric spacing must be positive")
        bad = ~_spd_ok(s[..., 0], s[..., 1], s[..., 2])
        if bad.any():
            j, i = np.argwhere(bad)[0]
            raise InputError(f"metric sample at node ({i}, {j}) is not SPD")
        object.__setattr__(self, "samples", s)

    @property
    def dims(self) -> tuple[int, int]:
        return self.samples.shape[1], self.samples.shape[0]

    @property
    def fgeom(self) -> np.ndarray:
        w, h = self.dims
        return np.array([self.origin[0], self.origin[1], self.spacing[0],
                         self.spacing[1], w, h], dtype=float)

    @property
    def rect(self) -> tuple[float, float, float, float]:
        w, h = self.dims
        x0, y0 = self.origin
        return x0, y0, x0 + (w - 1) * self.spacing[0], y0 + (h - 1) * self.spacing[1]

    def node(self, i: int, j: int) -> tuple[float, float]:
        return (self.origin[0] + i * self.spacing[0], self.origin[1] + j * self.spacing[1])

    @classmethod
    def from_function(cls, fn, rect, dims) -> "MetricField":
        """Sample ``fn(x, y) -> 2x2`` on a ``dims = (W, H)`` lattice covering ``rect``."""
        x0, y0, x1, y1 = rect
        w, h = dims
        dx = (x1 - x0) / (w - 1)
        dy = (y1 - y0) / (h - 1)
        s = np.empty((h, w, 3))
        for j in range(h):
            for i in range(w):
                q = np.asarray(fn(x0 + i * dx, y0 + j * dy), dtype=float)
                s[j, i] = q[0, 0], 0.5 * (q[0, 1] + q[1, 0]), q[1, 1]
        return cls((x0, y0), (dx, dy), s)


def sample_q(mf: MetricField, p) -> np.ndarray:
    """Bilinearly interpolated metric at p; queries outside the lattice clamp."""
    q11, q12, q22 = K.bilinear(mf.samples, mf.fgeom, float(p[0]), float(p[1]))
    return np.array([[q11, q12], [q12, q22]])


def eigen_ratio(q11, q12, q22):
    """lambda_min / lambda_max of symmetric 2x2 matrices (vectorized)."""
    tr = q11 + q22
    disc = np.sqrt((q11 - q22) ** 2 + 4.0 * q12 ** 2)
    return (tr - disc) / (tr + disc)


def field_gamma(mf: MetricField) -> float:
    """Node-wise minimum eigenvalue ratio (not a bound between nodes)."""
    s = mf.samples
    return float(np.min(eigen_ratio(s[..., 0], s[..., 1], s[..., 2])))


def load_metric_field(path) -> MetricField:
    """Read the text format: ``W H x0 y0 dx dy`` then W*H ``q11 q12 q22`` rows."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read metric file {path}: {exc}") from exc
    rows = [(n, ln.split()) for n, ln in enumerate(lines, 1) if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise InputError(f"{path}: empty metric file")
    n0, head = rows[0]
    if len(head) != 6:
        raise InputError(f"{path}:{n0}: header must be 'W H x0 y0 dx dy'")
    try:
        w, h = int(head[0]), int(head[1])
        x0, y0, dx, dy = map(float, head[2:])
    except ValueError as exc:
        raise InputError(f"{path}:{n0}: bad header: {exc}") from exc
    body = rows[1:]
    if len(body) != w * h:
        raise InputError(f"{path}: expected {w * h} sample rows, found {len(body)}")
    s = np.empty((h * w, 3))
    for k, (lineno, parts) in enumerate(body):
        if len(parts) != 3:
            raise InputError(f"{path}:{lineno}: expected 'q11 q12 q22'")
        try:
            q = [float(v) for v in parts]
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from exc
        if not _spd_ok(*q):
            raise InputError(f"{path}:{lineno}: metric sample is not SPD")
        s[k] = q
    return MetricField((x0, y0), (dx, dy), s.reshape(h, w, 3))


def save_metric_field(mf: MetricField, path) -> None:
    w, h = mf.dims
    head = (*mf.origin, *mf.spacing)
    out = [f"{w} {h} " + " ".join(repr(float(v)) for v in head)]
    for q in mf.samples.reshape(-1, 3).tolist():
        out.append(f"{q[0]!r} {q[1]!r} {q[2]!r}")
    Path(path).write_text("\n".join(out) + "\n")
