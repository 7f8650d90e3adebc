"""Compiled per-node kernels for the solver sweeps.

All kernels take the flattened grid ``u``, the flat indices of the interior
nodes and translation-invariant stencils expressed as flat index offsets:

* ``corner_off`` / ``corner_w`` with shape ``(M, 4)``: the bilinear corners
  and weights of each of the ``M`` circle samples;
* ``disk_off``: the nodes inside the closed disk;
* ``ball_off`` / ``ball_w``: the aggregated disk-mean stencil.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _select(buf, k):
    """Wirth's selection: partially order ``buf`` in place so ``buf[k]`` is its k-th smallest value."""
    lo, hi = 0, buf.size - 1
    while lo < hi:
        pivot = buf[k]
        i, j = lo, hi
        while True:
            while buf[i] < pivot:
                i += 1
            while pivot < buf[j]:
                j -= 1
            if i <= j:
                buf[i], buf[j] = buf[j], buf[i]
                i += 1
                j -= 1
            if i > j:
                break
        if j < k:
            lo = i
        if k < i:
            hi = j


@njit(cache=True)
def _samples(u, base, corner_off, corner_w, buf):
    m = corner_off.shape[0]
    hi = -np.inf
    lo = np.inf
    total = 0.0
    for k in range(m):
        v = 0.0
        for c in range(4):
            v += corner_w[k, c] * u[base + corner_off[k, c]]
        buf[k] = v
        total += v
        if v > hi:
            hi = v
        if v < lo:
            lo = v
    return total / m, hi, lo


@njit(cache=True)
def _median(buf):
    m = buf.size // 2
    _select(buf, m)
    below = buf[0]
    for i in range(1, m):
        if buf[i] > below:
            below = buf[i]
    return 0.5 * (below + buf[m])


@njit(cache=True)
def fe1_rhs(u, interior, corner_off, corner_w, w_med, w_mean):
    n = interior.size
    out = np.empty(n)
    buf = np.empty(corner_off.shape[0])
    for i in range(n):
        mean, _, _ = _samples(u, interior[i], corner_off, corner_w, buf)
        if w_med != 0.0:
            out[i] = w_med * _median(buf) + w_mean * mean
        else:
            out[i] = w_mean * mean
    return out


@njit(cache=True)
def _disk_extrema(u, base, disk_off, hi, lo):
    for j in range(disk_off.size):
        v = u[base + disk_off[j]]
        if v > hi:
            hi = v
        if v < lo:
            lo = v
    return hi, lo


@njit(cache=True)
def fe2_rhs(u, interior, corner_off, corner_w, disk_off, w_med, w_hi, w_lo):
    n = interior.size
    out = np.empty(n)
    buf = np.empty(corner_off.shape[0])
    for i in range(n):
        base = interior[i]
        _, hi, lo = _samples(u, base, corner_off, corner_w, buf)
        hi, lo = _disk_extrema(u, base, disk_off, hi, lo)
        out[i] = w_med * _median(buf) + w_hi * hi + w_lo * lo
    return out


@njit(cache=True)
def manfredi_rhs(u, interior, corner_off, corner_w, disk_off, ball_off, ball_w,
                 w_hi, w_lo, w_ball):
    n = interior.size
    out = np.empty(n)
    buf = np.empty(corner_off.shape[0])
    for i in range(n):
        base = interior[i]
        _, hi, lo = _samples(u, base, corner_off, corner_w, buf)
        hi, lo = _disk_extrema(u, base, disk_off, hi, lo)
        ball = 0.0
        for j in range(ball_off.size):
            ball += ball_w[j] * u[base + ball_off[j]]
        out[i] = w_hi * hi + w_lo * lo + w_ball * ball
    return out
