"""Scalar numba kernels for the built-in divergences.

Every divergence value in the package goes through :func:`value`, whether it
is requested one at a time from Python or in bulk by the grid propagation.
That keeps stored grid values bitwise recomputable.

A divergence is packed as ``(fam, sub, params, field, fgeom)``:

* ``fam``: 0 quadratic, 1 bregman, 2 lp, 3 csiszar
* ``sub``: metric kind / potential / f-function code
* ``params``: float64[8]; lp exponent in slot 0, constant metric in 1..3
* ``field``: (H, W, 3) sampled metric (dummy when unused)
* ``fgeom``: x0, y0, dx, dy, W, H of the sampled metric
"""
import math

import numpy as np
from numba import njit

FAM_QUADRATIC = 0
FAM_BREGMAN = 1
FAM_LP = 2
FAM_CSISZAR = 3

METRIC_IDENTITY = 0
METRIC_CONSTANT = 1
METRIC_SAMPLED = 2
METRIC_ROTATING = 3
METRIC_SHEARED = 4

POTENTIAL_HALF_SQ = 0
POTENTIAL_XLOGX = 1

F_HELLINGER = 0
F_KL = 1


@njit(cache=True)
def bilinear(field, fgeom, x, y):
    x0, y0, dx, dy = fgeom[0], fgeom[1], fgeom[2], fgeom[3]
    w = int(fgeom[4])
    h = int(fgeom[5])
    fx = (x - x0) / dx
    fy = (y - y0) / dy
    if fx < 0.0:
        fx = 0.0
    elif fx > w - 1:
        fx = float(w - 1)
    if fy < 0.0:
        fy = 0.0
    elif fy > h - 1:
        fy = float(h - 1)
    i = int(math.floor(fx))
    j = int(math.floor(fy))
    if i > w - 2:
        i = w - 2
    if j > h - 2:
        j = h - 2
    t = fx - i
    u = fy - j
    w00 = (1.0 - t) * (1.0 - u)
    w10 = t * (1.0 - u)
    w01 = (1.0 - t) * u
    w11 = t * u
    q11 = w00 * field[j, i, 0] + w10 * field[j, i + 1, 0] + w01 * field[j + 1, i, 0] + w11 * field[j + 1, i + 1, 0]
    q12 = w00 * field[j, i, 1] + w10 * field[j, i + 1, 1] + w01 * field[j + 1, i, 1] + w11 * field[j + 1, i + 1, 1]
    q22 = w00 * field[j, i, 2] + w10 * field[j, i + 1, 2] + w01 * field[j + 1, i, 2] + w11 * field[j + 1, i + 1, 2]
    return q11, q12, q22


@njit(cache=True)
def closed_metric(sub, params, field, fgeom, x, y):
    if sub == METRIC_IDENTITY:
        return 1.0, 0.0, 1.0
    if sub == METRIC_CONSTANT:
        return params[1], params[2], params[3]
    if sub == METRIC_SAMPLED:
        return bilinear(field, fgeom, x, y)
    if sub == METRIC_ROTATING:
        # R(x) diag(1, 4) R(x)^T
        c = math.cos(x)
        s = math.sin(x)
        return c * c + 4.0 * s * s, -3.0 * c * s, s * s + 4.0 * c * c
    # METRIC_SHEARED: [[2, k], [k, 1]] with k = 0.8 sin(2 pi y)
    k = 0.8 * math.sin(2.0 * math.pi * y)
    return 2.0, k, 1.0


@njit(cache=True)
def potential(sub, x, y):
    if sub == POTENTIAL_HALF_SQ:
        return 0.5 * (x * x + y * y), x, y
    return x * math.log(x) + y * math.log(y), math.log(x) + 1.0, math.log(y) + 1.0


@njit(cache=True)
def f_value(sub, t):
    if sub == F_HELLINGER:
        r = math.sqrt(t) - 1.0
        return r * r
    return t * math.log(t)


@njit(cache=True)
def point_aux(fam, sub, params, field, fgeom, x, y):
    """Per-point quantities that depend only on the second argument."""
    if fam == FAM_QUADRATIC:
        return closed_metric(sub, params, field, fgeom, x, y)
    if fam == FAM_BREGMAN:
        return potential(sub, x, y)
    return 0.0, 0.0, 0.0


@njit(cache=True)
def site_aux(fam, sub, x, y):
    if fam == FAM_BREGMAN:
        f, _, _ = potential(sub, x, y)
        return f
    return 0.0


@njit(cache=True)
def value(fam, sub, params, sx, sy, sb, vx, vy, a0, a1, a2):
    """D(s || v) given the precomputed site and point auxiliaries."""
    if sx == vx and sy == vy:
        return 0.0
    dx = sx - vx
    dy = sy - vy
    if fam == FAM_QUADRATIC:
        r = dx * dx * a0 + 2.0 * dx * dy * a1 + dy * dy * a2
        return math.sqrt(r) if r > 0.0 else 0.0
    if fam == FAM_BREGMAN:
        r = sb - a0 - (dx * a1 + dy * a2)
        return r if r > 0.0 else 0.0
    if fam == FAM_LP:
        p = params[0]
        return (abs(dx) ** p + abs(dy) ** p) ** (1.0 / p)
    # csiszar on the 3-atom simplex: rho = s, mu = v
    r3 = 1.0 - sx - sy
    m3 = 1.0 - vx - vy
    r = vx * f_value(sub, sx / vx) + vy * f_value(sub, sy / vy) + m3 * f_value(sub, r3 / m3)
    return r if r > 0.0 else 0.0


@njit(cache=True)
def eval_pair(fam, sub, params, field, fgeom, sx, sy, vx, vy):
    if sx == vx and sy == vy:
        return 0.0
    a0, a1, a2 = point_aux(fam, sub, params, field, fgeom, vx, vy)
    sb = site_aux(fam, sub, sx, sy)
    return value(fam, sub, params, sx, sy, sb, vx, vy, a0, a1, a2)


@njit(cache=True)
def points_aux(fam, sub, params, field, fgeom, xs, ys):
    n = xs.shape[0]
    out = np.empty((n, 3))
    for k in range(n):
        a0, a1, a2 = point_aux(fam, sub, params, field, fgeom, xs[k], ys[k])
        out[k, 0] = a0
        out[k, 1] = a1
        out[k, 2] = a2
    return out


@njit(cache=True)
def eval_site_to_points(fam, sub, params, sx, sy, sb, xs, ys, aux):
    n = xs.shape[0]
    out = np.empty(n)
    for k in range(n):
        out[k] = value(fam, sub, params, sx, sy, sb, xs[k], ys[k], aux[k, 0], aux[k, 1], aux[k, 2])
    return out


@njit(cache=True)
def eval_points_to_point(fam, sub, params, field, fgeom, sxs, sys_, vx, vy):
    n = sxs.shape[0]
    out = np.empty(n)
    a0, a1, a2 = point_aux(fam, sub, params, field, fgeom, vx, vy)
    for k in range(n):
        sb = site_aux(fam, sub, sxs[k], sys_[k])
        out[k] = value(fam, sub, params, sxs[k], sys_[k], sb, vx, vy, a0, a1, a2)
    return out
