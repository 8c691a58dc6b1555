"""Pure-numpy implementations of the hot inner loops.

Inputs are contiguous float64 arrays; padding and bias handling live in the
callers, so each function here is a plain dense kernel.
"""

import numpy as np


def correlate_valid(padded, kern):
    return np.correlate(padded, kern, mode="valid")


def conv1d_fwd(xp, w, stride):
    # xp: (Cin, Tp) already padded; w: (Cout, Cin, K)
    cout, cin, k = w.shape
    tout = (xp.shape[1] - k) // stride + 1
    y = np.zeros((cout, tout))
    for kk in range(k):
        cols = xp[:, kk : kk + stride * (tout - 1) + 1 : stride]
        y += w[:, :, kk] @ cols
    return y


def conv1d_bwd_x(gy, w, stride, tp):
    cout, cin, k = w.shape
    tout = gy.shape[1]
    gxp = np.zeros((cin, tp))
    for kk in range(k):
        gxp[:, kk : kk + stride * (tout - 1) + 1 : stride] += w[:, :, kk].T @ gy
    return gxp


def conv1d_bwd_w(xp, gy, stride, k):
    cout = gy.shape[0]
    cin = xp.shape[0]
    tout = gy.shape[1]
    gw = np.zeros((cout, cin, k))
    for kk in range(k):
        cols = xp[:, kk : kk + stride * (tout - 1) + 1 : stride]
        gw[:, :, kk] = gy @ cols.T
    return gw


def conv2d_fwd(xp, w, stride):
    # xp: (Cin, Hp, Wp); w: (Cout, Cin, KH, KW)
    cout, cin, kh, kw = w.shape
    hout = (xp.shape[1] - kh) // stride + 1
    wout = (xp.shape[2] - kw) // stride + 1
    y = np.zeros((cout, hout, wout))
    for i in range(kh):
        for j in range(kw):
            patch = xp[
                :,
                i : i + stride * (hout - 1) + 1 : stride,
                j : j + stride * (wout - 1) + 1 : stride,
            ]
            y += np.tensordot(w[:, :, i, j], patch, axes=(1, 0))
    return y


def conv2d_bwd_x(gy, w, stride, hp, wp):
    cout, cin, kh, kw = w.shape
    hout, wout = gy.shape[1], gy.shape[2]
    gxp = np.zeros((cin, hp, wp))
    for i in range(kh):
        for j in range(kw):
            gxp[
                :,
                i : i + stride * (hout - 1) + 1 : stride,
                j : j + stride * (wout - 1) + 1 : stride,
            ] += np.tensordot(w[:, :, i, j].T, gy, axes=(1, 0))
    return gxp


def conv2d_bwd_w(xp, gy, stride, kh, kw):
    cout = gy.shape[0]
    cin = xp.shape[0]
    hout, wout = gy.shape[1], gy.shape[2]
    gw = np.zeros((cout, cin, kh, kw))
    gy_flat = gy.reshape(cout, -1)
    for i in range(kh):
        for j in range(kw):
            patch = xp[
                :,
                i : i + stride * (hout - 1) + 1 : stride,
                j : j + stride * (wout - 1) + 1 : stride,
            ].reshape(cin, -1)
            gw[:, :, i, j] = gy_flat @ patch.T
    return gw
