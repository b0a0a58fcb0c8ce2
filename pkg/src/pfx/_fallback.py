"""Pure numpy versions of the compiled kernels in ``_native.pyx``.

Operation order mirrors the compiled loops so both backends produce the same
floating-point results.
"""

import numpy as np

_DX = (1, 1, 0, -1, -1, -1, 0, 1)
_DY = (0, -1, -1, -1, 0, 1, 1, 1)

_TAU = 1e-12
_EDGE_EPS = 1e-9


def convolve_separable(img, taps):
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    r = len(taps) // 2
    xs = np.arange(w)
    ys = np.arange(h)
    tmp = np.zeros((h, w))
    for k, wk in enumerate(taps):
        tmp += wk * img[:, np.clip(xs + k - r, 0, w - 1)]
    out = np.zeros((h, w))
    for k, wk in enumerate(taps):
        out += wk * tmp[np.clip(ys + k - r, 0, h - 1), :]
    return out


def warp_bilinear(img, inv, out_h, out_w):
    img = np.asarray(img)
    h, w = img.shape
    xmax, ymax = float(w - 1), float(h - 1)
    gy, gx = np.mgrid[0:out_h, 0:out_w].astype(np.float64)
    sx = inv[0, 0] * gx + inv[0, 1] * gy + inv[0, 2]
    sy = inv[1, 0] * gx + inv[1, 1] * gy + inv[1, 2]
    inside = (sx >= -_EDGE_EPS) & (sy >= -_EDGE_EPS) & (sx <= xmax + _EDGE_EPS) & (sy <= ymax + _EDGE_EPS)
    sx = np.clip(sx, 0.0, xmax)
    sy = np.clip(sy, 0.0, ymax)
    x0 = np.floor(sx).astype(np.intp)
    y0 = np.floor(sy).astype(np.intp)
    fx = sx - x0
    fy = sy - y0
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    src = img.astype(np.float64)
    top = (1.0 - fx) * src[y0, x0] + fx * src[y0, x1]
    bot = (1.0 - fx) * src[y1, x0] + fx * src[y1, x1]
    out = (1.0 - fy) * top + fy * bot
    out[~inside] = 0.0
    return out


def lbp_codes(img):
    img = np.asarray(img, dtype=np.uint8)
    h, w = img.shape
    center = img[1:h - 1, 1:w - 1]
    code = np.zeros(center.shape, dtype=np.uint16)
    for n in range(8):
        nb = img[1 + _DY[n]:h - 1 + _DY[n], 1 + _DX[n]:w - 1 + _DX[n]]
        code |= (nb >= center).astype(np.uint16) << n
    return code.astype(np.uint8)


def smo_solve(K, y, C, eps, max_iter, order):
    n = y.shape[0]
    alpha = np.zeros(n)
    G = np.full(n, -1.0)
    pos = y > 0
    y_ord = y[order]
    pos_ord = pos[order]
    it = 0
    converged = False
    while it < max_iter:
        a_ord = alpha[order]
        v = np.where(pos_ord, -G[order], G[order])
        up = np.where(pos_ord, a_ord < C, a_ord > 0)
        low = np.where(pos_ord, a_ord > 0, a_ord < C)
        if not up.any() or not low.any():
            converged = True
            break
        vu = np.where(up, v, -np.inf)
        vl = np.where(low, v, np.inf)
        si = int(np.argmax(vu))
        sj = int(np.argmin(vl))
        if vu[si] - vl[sj] < eps:
            converged = True
            break
        i, j = int(order[si]), int(order[sj])
        it += 1

        yi, yj = y_ord[si], y_ord[sj]
        old_ai, old_aj = alpha[i], alpha[j]
        ai, aj = old_ai, old_aj
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if quad <= 0.0:
            quad = _TAU
        if yi != yj:
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            elif ai < 0:
                ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            elif aj > C:
                aj, ai = C, C + diff
        else:
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ai -= delta
            aj += delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            elif aj < 0:
                aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            elif ai < 0:
                ai, aj = 0.0, total
        alpha[i] = ai
        alpha[j] = aj
        dai = ai - old_ai
        daj = aj - old_aj
        G += (y * yi * K[:, i]) * dai + (y * yj * K[:, j]) * daj
    return alpha, G, it, converged
