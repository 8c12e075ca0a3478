"""Fourth-order finite-difference stencils on uniform grids.

Periodic versions act along axis 0 via ``np.roll``; the sparse circulant
matrices are used where the solver needs Jacobians and Hessians.
"""

import numpy as np
import scipy.sparse as sp

D1_STENCIL = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
D2_STENCIL = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
OFFSETS = (-2, -1, 0, 1, 2)


def _apply(f, stencil):
    out = np.zeros_like(f, dtype=float)
    for off, c in zip(OFFSETS, stencil):
        if c != 0.0:
            # f[i + off] lands at index i
            out += c * np.roll(f, -off, axis=0)
    return out


def pdiff1(f, step):
    """Periodic first derivative along axis 0."""
    return _apply(np.asarray(f, dtype=float), D1_STENCIL) / step


def pdiff2(f, step):
    """Periodic second derivative along axis 0."""
    return _apply(np.asarray(f, dtype=float), D2_STENCIL) / step**2


def circulant(n, stencil, step, power):
    """Sparse periodic difference matrix of the given stencil."""
    rows, cols, vals = [], [], []
    idx = np.arange(n)
    for off, c in zip(OFFSETS, stencil):
        if c == 0.0:
            continue
        rows.append(idx)
        cols.append((idx + off) % n)
        vals.append(np.full(n, c / step**power))
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )


def diff_matrices(n, step):
    """Return ``(D1, D2)`` periodic sparse operators on ``n`` nodes."""
    return circulant(n, D1_STENCIL, step, 1), circulant(n, D2_STENCIL, step, 2)


# one-sided fourth-order weights for the first two and last two nodes
_D1_EDGE = np.array(
    [
        [-25.0, 48.0, -36.0, 16.0, -3.0],
        [-3.0, -10.0, 18.0, -6.0, 1.0],
    ]
) / 12.0
_D2_EDGE = np.array(
    [
        [45.0, -154.0, 214.0, -156.0, 61.0, -10.0],
        [10.0, -15.0, -4.0, 14.0, -6.0, 1.0],
    ]
) / 12.0


def diff1(f, step, axis=0):
    """Non-periodic fourth-order first derivative."""
    f = np.moveaxis(np.asarray(f, dtype=float), axis, 0)
    n = f.shape[0]
    if n < 6:
        raise ValueError("need at least 6 nodes for one-sided stencils")
    out = np.empty_like(f)
    out[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / 12.0
    for k in range(2):
        out[k] = np.tensordot(_D1_EDGE[k], f[:5], axes=(0, 0))
        out[n - 1 - k] = -np.tensordot(_D1_EDGE[k], f[::-1][:5], axes=(0, 0))
    return np.moveaxis(out / step, 0, axis)


def diff2(f, step, axis=0):
    """Non-periodic fourth-order second derivative."""
    f = np.moveaxis(np.asarray(f, dtype=float), axis, 0)
    n = f.shape[0]
    if n < 6:
        raise ValueError("need at least 6 nodes for one-sided stencils")
    out = np.empty_like(f)
    out[2:-2] = (
        -f[:-4] + 16.0 * f[1:-3] - 30.0 * f[2:-2] + 16.0 * f[3:-1] - f[4:]
    ) / 12.0
    for k in range(2):
        out[k] = np.tensordot(_D2_EDGE[k], f[:6], axes=(0, 0))
        out[n - 1 - k] = np.tensordot(_D2_EDGE[k], f[::-1][:6], axes=(0, 0))
    return np.moveaxis(out / step**2, 0, axis)
