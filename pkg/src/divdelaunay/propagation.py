"""Best-first multi-source front propagation on the valence-6 grid.

Grid vertex ``v = j * W + i`` sits at ``(x0 + i*dx, y0 + j*dy)``. Each cell
is split by its SW-NE diagonal, so interior vertices have the six
neighbours E, W, N, S, NE, SW.
"""
import numpy as np
from numba import njit, prange

from . import _kernels as K

# E, W, N, S, NE, SW
_DI = np.array([1, -1, 0, 0, 1, -1], dtype=np.int64)
_DJ = np.array([0, 0, 1, -1, 1, -1], dtype=np.int64)


@njit(cache=True)
def _tol(a):
    return 1e-9 * (1.0 + abs(a))


@njit(cache=True)
def _better(d, s, cur, curlab):
    """Does candidate (value d, site s) beat the incumbent?"""
    if curlab < 0:
        return True
    t = _tol(cur)
    if d < cur - t:
        return True
    if abs(d - cur) <= t:
        return s < curlab
    return False


@njit(cache=True)
def _less(hk, hs, hv, a, b):
    if hk[a] != hk[b]:
        return hk[a] < hk[b]
    if hs[a] != hs[b]:
        return hs[a] < hs[b]
    return hv[a] < hv[b]


@njit(cache=True)
def _swap(hk, hs, hv, a, b):
    hk[a], hk[b] = hk[b], hk[a]
    hs[a], hs[b] = hs[b], hs[a]
    hv[a], hv[b] = hv[b], hv[a]


@njit(cache=True)
def _push(hk, hs, hv, size, key, s, v):
    hk[size] = key
    hs[size] = s
    hv[size] = v
    c = size
    while c > 0:
        p = (c - 1) >> 1
        if _less(hk, hs, hv, c, p):
            _swap(hk, hs, hv, c, p)
            c = p
        else:
            break
    return size + 1


@njit(cache=True)
def _pop(hk, hs, hv, size):
    v = hv[0]
    size -= 1
    if size > 0:
        hk[0] = hk[size]
        hs[0] = hs[size]
        hv[0] = hv[size]
        c = 0
        while True:
            l = 2 * c + 1
            if l >= size:
                break
            m = l
            r = l + 1
            if r < size and _less(hk, hs, hv, r, l):
                m = r
            if _less(hk, hs, hv, m, c):
                _swap(hk, hs, hv, m, c)
                c = m
            else:
                break
    return v, size


@njit(cache=True)
def propagate(fam, sub, params, sx, sy, sb, seeds, gx, gy, aux, di, dj):
    """Returns labels, values and counters (finalize, relax slots, in-grid relaxes, max received)."""
    w = gx.shape[0]
    h = gy.shape[0]
    nv = w * h
    n = sx.shape[0]
    label = np.full(nv, -1, dtype=np.int64)
    best = np.full(nv, np.inf)
    final = np.zeros(nv, dtype=np.bool_)
    received = np.zeros(nv, dtype=np.int64)
    cap = 6 * nv + n + 1
    hk = np.empty(cap)
    hs = np.empty(cap, dtype=np.int64)
    hv = np.empty(cap, dtype=np.int64)
    size = 0
    for k in range(n):
        v = seeds[k]
        i = v % w
        j = v // w
        d = K.value(fam, sub, params, sx[k], sy[k], sb[k], gx[i], gy[j], aux[v, 0], aux[v, 1], aux[v, 2])
        if _better(d, k, best[v], label[v]):
            best[v] = d
            label[v] = k
            size = _push(hk, hs, hv, size, d, k, v)
    n_final = 0
    n_relax = 0
    n_relax_in = 0
    while size > 0:
        v, size = _pop(hk, hs, hv, size)
        if final[v]:
            continue
        final[v] = True
        n_final += 1
        s = label[v]
        i = v % w
        j = v // w
        for t in range(6):
            n_relax += 1
            ii = i + di[t]
            jj = j + dj[t]
            if ii < 0 or ii >= w or jj < 0 or jj >= h:
                continue
            u = jj * w + ii
            if final[u]:
                continue
            n_relax_in += 1
            received[u] += 1
            d = K.value(fam, sub, params, sx[s], sy[s], sb[s], gx[ii], gy[jj], aux[u, 0], aux[u, 1], aux[u, 2])
            if _better(d, s, best[u], label[u]):
                best[u] = d
                label[u] = s
                size = _push(hk, hs, hv, size, d, s, u)
    counters = np.array([n_final, n_relax, n_relax_in, received.max() if nv > 0 else 0], dtype=np.int64)
    return label, best, counters


@njit(cache=True)
def _grid_aux(fam, sub, params, field, fgeom, gx, gy):
    w = gx.shape[0]
    h = gy.shape[0]
    out = np.empty((w * h, 3))
    for j in range(h):
        for i in range(w):
            a0, a1, a2 = K.point_aux(fam, sub, params, field, fgeom, gx[i], gy[j])
            v = j * w + i
            out[v, 0] = a0
            out[v, 1] = a1
            out[v, 2] = a2
    return out


@njit(cache=True, parallel=True)
def _grid_aux_banded(fam, sub, params, field, fgeom, gx, gy, band):
    w = gx.shape[0]
    h = gy.shape[0]
    out = np.empty((w * h, 3))
    nb = (h + band - 1) // band
    for b in prange(nb):
        for j in range(b * band, min(h, (b + 1) * band)):
            for i in range(w):
                a0, a1, a2 = K.point_aux(fam, sub, params, field, fgeom, gx[i], gy[j])
                v = j * w + i
                out[v, 0] = a0
                out[v, 1] = a1
                out[v, 2] = a2
    return out


def grid_aux(kernel, gx, gy, parallel=False, band=64):
    fam, sub, params, field, fgeom = kernel
    if parallel:
        return _grid_aux_banded(fam, sub, params, field, fgeom, gx, gy, band)
    return _grid_aux(fam, sub, params, field, fgeom, gx, gy)


@njit(cache=True)
def _exhaustive_row(fam, sub, params, sx, sy, sb, gx, gy, aux, j, lab, val):
    w = gx.shape[0]
    n = sx.shape[0]
    for i in range(w):
        v = j * w + i
        bl = -1
        bv = np.inf
        for k in range(n):
            d = K.value(fam, sub, params, sx[k], sy[k], sb[k], gx[i], gy[j], aux[v, 0], aux[v, 1], aux[v, 2])
            if _better(d, k, bv, bl):
                bv = d
                bl = k
        lab[v] = bl
        val[v] = bv


@njit(cache=True)
def exhaustive(fam, sub, params, sx, sy, sb, gx, gy, aux):
    nv = gx.shape[0] * gy.shape[0]
    lab = np.empty(nv, dtype=np.int64)
    val = np.empty(nv)
    for j in range(gy.shape[0]):
        _exhaustive_row(fam, sub, params, sx, sy, sb, gx, gy, aux, j, lab, val)
    return lab, val


@njit(cache=True, parallel=True)
def exhaustive_banded(fam, sub, params, sx, sy, sb, gx, gy, aux):
    nv = gx.shape[0] * gy.shape[0]
    lab = np.empty(nv, dtype=np.int64)
    val = np.empty(nv)
    for j in prange(gy.shape[0]):
        _exhaustive_row(fam, sub, params, sx, sy, sb, gx, gy, aux, j, lab, val)
    return lab, val
