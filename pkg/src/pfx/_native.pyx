# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Must stay numerically identical to ``_fallback``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()

# Hop offsets (dx, dy) for neighbours n = 0..7, starting East, counter-clockwise.
cdef int[8] _DX = [1, 1, 0, -1, -1, -1, 0, 1]
cdef int[8] _DY = [0, -1, -1, -1, 0, 1, 1, 1]

cdef double _TAU = 1e-12
cdef double _EDGE_EPS = 1e-9


def convolve_separable(const double[:, ::1] img, const double[::1] taps):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1], n = taps.shape[0]
    cdef Py_ssize_t r = n // 2
    cdef Py_ssize_t x, y, k, src
    cdef double acc
    tmp_arr = np.empty((h, w), dtype=np.float64)
    out_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] tmp = tmp_arr
    cdef double[:, ::1] out = out_arr
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for k in range(n):
                src = x + k - r
                if src < 0:
                    src = 0
                elif src >= w:
                    src = w - 1
                acc += taps[k] * img[y, src]
            tmp[y, x] = acc
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for k in range(n):
                src = y + k - r
                if src < 0:
                    src = 0
                elif src >= h:
                    src = h - 1
                acc += taps[k] * tmp[src, x]
            out[y, x] = acc
    return out_arr


def warp_bilinear(const unsigned char[:, ::1] img, const double[:, ::1] inv,
                  Py_ssize_t out_h, Py_ssize_t out_w):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t x, y, x0, y0, x1, y1
    cdef double sx, sy, fx, fy, top, bot
    cdef double a00 = inv[0, 0], a01 = inv[0, 1], a02 = inv[0, 2]
    cdef double a10 = inv[1, 0], a11 = inv[1, 1], a12 = inv[1, 2]
    cdef double xmax = <double>(w - 1), ymax = <double>(h - 1)
    out_arr = np.zeros((out_h, out_w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for y in range(out_h):
        for x in range(out_w):
            sx = a00 * x + a01 * y + a02
            sy = a10 * x + a11 * y + a12
            if sx < -_EDGE_EPS or sy < -_EDGE_EPS or sx > xmax + _EDGE_EPS or sy > ymax + _EDGE_EPS:
                continue
            if sx < 0.0:
                sx = 0.0
            elif sx > xmax:
                sx = xmax
            if sy < 0.0:
                sy = 0.0
            elif sy > ymax:
                sy = ymax
            x0 = <Py_ssize_t>floor(sx)
            y0 = <Py_ssize_t>floor(sy)
            fx = sx - x0
            fy = sy - y0
            x1 = x0 + 1 if x0 + 1 < w else w - 1
            y1 = y0 + 1 if y0 + 1 < h else h - 1
            top = (1.0 - fx) * img[y0, x0] + fx * img[y0, x1]
            bot = (1.0 - fx) * img[y1, x0] + fx * img[y1, x1]
            out[y, x] = (1.0 - fy) * top + fy * bot
    return out_arr


def lbp_codes(const unsigned char[:, ::1] img):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1]
    cdef Py_ssize_t x, y
    cdef int n, code, c
    out_arr = np.empty((h - 2, w - 2), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            c = img[y, x]
            code = 0
            for n in range(8):
                code |= (img[y + _DY[n], x + _DX[n]] >= c) << n  # branch-free
            out[y - 1, x - 1] = <unsigned char>code
    return out_arr


def smo_solve(const double[:, ::1] K, const double[::1] y, double C, double eps,
              long long max_iter, const long long[::1] order):
    """Max-violating-pair SMO on the dual. Returns (alpha, grad, n_iter, converged)."""
    cdef Py_ssize_t n = y.shape[0]
    cdef Py_ssize_t t, s, i, j
    cdef long long it = 0
    cdef double gmax, gmin, v, quad, delta, diff, total
    cdef double old_ai, old_aj, dai, daj, yi, yj
    cdef bint converged = False
    alpha_arr = np.zeros(n, dtype=np.float64)
    grad_arr = np.full(n, -1.0, dtype=np.float64)
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] G = grad_arr

    while it < max_iter:
        gmax = -1e300
        gmin = 1e300
        i = -1
        j = -1
        for s in range(n):
            t = order[s]
            if y[t] > 0:
                v = -G[t]
                if alpha[t] < C and v > gmax:
                    gmax = v
                    i = t
                if alpha[t] > 0 and v < gmin:
                    gmin = v
                    j = t
            else:
                v = G[t]
                if alpha[t] > 0 and v > gmax:
                    gmax = v
                    i = t
                if alpha[t] < C and v < gmin:
                    gmin = v
                    j = t
        if i < 0 or j < 0 or gmax - gmin < eps:
            converged = True
            break
        it += 1

        yi = y[i]
        yj = y[j]
        old_ai = alpha[i]
        old_aj = alpha[j]
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0.0:
            quad = _TAU
        if yi != yj:
            delta = (-G[i] - G[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0
                    alpha[i] = diff
            else:
                if alpha[i] < 0:
                    alpha[i] = 0
                    alpha[j] = -diff
            if diff > 0:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            else:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = C + diff
        else:
            delta = (G[i] - G[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
            else:
                if alpha[j] < 0:
                    alpha[j] = 0
                    alpha[i] = total
            if total > C:
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            else:
                if alpha[i] < 0:
                    alpha[i] = 0
                    alpha[j] = total

        dai = alpha[i] - old_ai
        daj = alpha[j] - old_aj
        for t in range(n):
            G[t] += (y[t] * yi * K[t, i]) * dai + (y[t] * yj * K[t, j]) * daj

    return alpha_arr, grad_arr, it, converged
