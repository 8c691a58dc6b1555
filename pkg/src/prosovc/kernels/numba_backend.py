"""Numba @njit implementations of the hot inner loops.

Same contracts as numpy_backend. Compilation is cached on disk, so the
one-time JIT cost is paid once per machine, not once per process.
"""

import numba as nb
import numpy as np


@nb.njit(cache=True)
def correlate_valid(padded, kern):
    n = padded.shape[0] - kern.shape[0] + 1
    out = np.empty(n)
    for t in range(n):
        acc = 0.0
        for j in range(kern.shape[0]):
            acc += padded[t + j] * kern[j]
        out[t] = acc
    return out


@nb.njit(cache=True)
def conv1d_fwd(xp, w, stride):
    cout, cin, k = w.shape
    tout = (xp.shape[1] - k) // stride + 1
    y = np.zeros((cout, tout))
    for co in range(cout):
        for t in range(tout):
            base = t * stride
            acc = 0.0
            for ci in range(cin):
                for kk in range(k):
                    acc += w[co, ci, kk] * xp[ci, base + kk]
            y[co, t] = acc
    return y


@nb.njit(cache=True)
def conv1d_bwd_x(gy, w, stride, tp):
    cout, cin, k = w.shape
    tout = gy.shape[1]
    gxp = np.zeros((cin, tp))
    for co in range(cout):
        for t in range(tout):
            base = t * stride
            g = gy[co, t]
            for ci in range(cin):
                for kk in range(k):
                    gxp[ci, base + kk] += w[co, ci, kk] * g
    return gxp


@nb.njit(cache=True)
def conv1d_bwd_w(xp, gy, stride, k):
    cout = gy.shape[0]
    cin = xp.shape[0]
    tout = gy.shape[1]
    gw = np.zeros((cout, cin, k))
    for co in range(cout):
        for t in range(tout):
            base = t * stride
            g = gy[co, t]
            for ci in range(cin):
                for kk in range(k):
                    gw[co, ci, kk] += g * xp[ci, base + kk]
    return gw


@nb.njit(cache=True)
def conv2d_fwd(xp, w, stride):
    cout, cin, kh, kw = w.shape
    hout = (xp.shape[1] - kh) // stride + 1
    wout = (xp.shape[2] - kw) // stride + 1
    y = np.zeros((cout, hout, wout))
    for co in range(cout):
        for hi in range(hout):
            for wi in range(wout):
                hb = hi * stride
                wb = wi * stride
                acc = 0.0
                for ci in range(cin):
                    for i in range(kh):
                        for j in range(kw):
                            acc += w[co, ci, i, j] * xp[ci, hb + i, wb + j]
                y[co, hi, wi] = acc
    return y


@nb.njit(cache=True)
def conv2d_bwd_x(gy, w, stride, hp, wp):
    cout, cin, kh, kw = w.shape
    hout, wout = gy.shape[1], gy.shape[2]
    gxp = np.zeros((cin, hp, wp))
    for co in range(cout):
        for hi in range(hout):
            for wi in range(wout):
                hb = hi * stride
                wb = wi * stride
                g = gy[co, hi, wi]
                for ci in range(cin):
                    for i in range(kh):
                        for j in range(kw):
                            gxp[ci, hb + i, wb + j] += w[co, ci, i, j] * g
    return gxp


@nb.njit(cache=True)
def conv2d_bwd_w(xp, gy, stride, kh, kw):
    cout = gy.shape[0]
    cin = xp.shape[0]
    hout, wout = gy.shape[1], gy.shape[2]
    gw = np.zeros((cout, cin, kh, kw))
    for co in range(cout):
        for hi in range(hout):
            for wi in range(wout):
                hb = hi * stride
                wb = wi * stride
                g = gy[co, hi, wi]
                for ci in range(cin):
                    for i in range(kh):
                        for j in range(kw):
                            gw[co, ci, i, j] += g * xp[ci, hb + i, wb + j]
    return gw
