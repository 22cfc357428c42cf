"""Backend selection for the hot kernels.

Set HANDOVER_NUMBA=0 to force the pure-numpy path; by default numba is
used when importable. `backend_name()` reports which one is active and
`warmup()` triggers JIT compilation ahead of timed sections.
"""

import os

import numpy as np

from . import _kernels

USE_NUMBA = os.environ.get("HANDOVER_NUMBA", "1").lower() not in ("0", "false", "no")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False


def _np_se_kernel_matrix(xa, xb, lengthscales, signal_var):
    wa = xa / lengthscales
    wb = xb / lengthscales
    sq = (
        np.sum(wa * wa, axis=1)[:, None]
        + np.sum(wb * wb, axis=1)[None, :]
        - 2.0 * (wa @ wb.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return signal_var * np.exp(-0.5 * sq)


def _np_se_kernel_vec(x_train, x_star, lengthscales, signal_var):
    diff = (x_train - x_star[None, :]) / lengthscales
    return signal_var * np.exp(-0.5 * np.sum(diff * diff, axis=1))


if USE_NUMBA:
    mdh_frames = njit(cache=True)(_kernels.mdh_frames_impl)
    se_kernel_matrix = njit(cache=True)(_kernels.se_kernel_matrix_impl)
    se_kernel_vec = njit(cache=True)(_kernels.se_kernel_vec_impl)
else:
    mdh_frames = _kernels.mdh_frames_impl
    se_kernel_matrix = _np_se_kernel_matrix
    se_kernel_vec = _np_se_kernel_vec


def backend_name():
    return "numba" if USE_NUMBA else "numpy"


def warmup():
    """Compile the kernels (no-op on the numpy backend)."""
    z = np.zeros(2)
    mdh_frames(z, z, z, z, z)
    x = np.zeros((2, 6))
    ls = np.ones(6)
    se_kernel_matrix(x, x, ls, 1.0)
    se_kernel_vec(x, np.zeros(6), ls, 1.0)
