"""Loop-form numeric kernels, written so numba can compile them unchanged.

`accel` decides at import time whether these run jitted or as plain Python;
the squared-exponential matrix additionally has a vectorized numpy fallback
there because the raw loop is too slow without compilation.
"""

import numpy as np


def mdh_frames_impl(alpha, a, d, theta, q):
    """Cumulative joint frames of a revolute modified-DH chain.

    Returns (Rs, ps): Rs[i] is the rotation of frame i in the base,
    ps[i] its origin. Frame i is the frame the i-th joint rotates about
    (z axis = joint axis).
    """
    n = q.shape[0]
    Rs = np.empty((n, 3, 3))
    ps = np.empty((n, 3))
    R = np.eye(3)
    p = np.zeros(3)
    for i in range(n):
        th = theta[i] + q[i]
        ct = np.cos(th)
        st = np.sin(th)
        ca = np.cos(alpha[i])
        sa = np.sin(alpha[i])
        # link transform RotX(alpha)·TransX(a)·RotZ(theta)·TransZ(d)
        Rl = np.empty((3, 3))
        Rl[0, 0] = ct
        Rl[0, 1] = -st
        Rl[0, 2] = 0.0
        Rl[1, 0] = st * ca
        Rl[1, 1] = ct * ca
        Rl[1, 2] = -sa
        Rl[2, 0] = st * sa
        Rl[2, 1] = ct * sa
        Rl[2, 2] = ca
        pl = np.empty(3)
        pl[0] = a[i]
        pl[1] = -d[i] * sa
        pl[2] = d[i] * ca
        p = p + R @ pl
        R = R @ Rl
        Rs[i] = R
        ps[i] = p
    return Rs, ps


def se_kernel_matrix_impl(xa, xb, lengthscales, signal_var):
    """Squared-exponential kernel matrix k(xa_i, xb_j), anisotropic."""
    na = xa.shape[0]
    nb = xb.shape[0]
    ndim = xa.shape[1]
    wa = xa / lengthscales
    wb = xb / lengthscales
    out = np.empty((na, nb))
    for i in range(na):
        for j in range(nb):
            s = 0.0
            for k in range(ndim):
                t = wa[i, k] - wb[j, k]
                s += t * t
            out[i, j] = signal_var * np.exp(-0.5 * s)
    return out


def se_kernel_vec_impl(x_train, x_star, lengthscales, signal_var):
    """Kernel values between every training row and one test point."""
    n = x_train.shape[0]
    ndim = x_train.shape[1]
    out = np.empty(n)
    for i in range(n):
        s = 0.0
        for k in range(ndim):
            t = (x_train[i, k] - x_star[k]) / lengthscales[k]
            s += t * t
        out[i] = signal_var * np.exp(-0.5 * s)
    return out
