"""Stencil kernels on flattened uniform grids.

Every kernel works on C-ordered flat arrays of a full node grid together with
an ``active`` index set.  Active nodes never touch the outer boundary, so
``i +- stride`` stays in bounds.  Each kernel has a numba version and a numpy
version with identical semantics; the module-level names point at whichever
``_jit.NUMBA_ENABLED`` selects.
"""
import numpy as np

from ._jit import NUMBA_ENABLED, njit


def flat_strides(shape):
    """Element strides of a C-ordered array of the given shape."""
    strides = np.ones(len(shape), dtype=np.int64)
    for k in range(len(shape) - 2, -1, -1):
        strides[k] = strides[k + 1] * shape[k + 1]
    return strides


# --------------------------------------------------------------------------
# numba versions

@njit
def _graph_laplace_nb(x, idx, strides, out):
    two_n = 2.0 * strides.size
    for t in range(idx.size):
        i = idx[t]
        acc = two_n * x[i]
        for s in strides:
            acc -= x[i + s] + x[i - s]
        out[i] = acc


@njit
def _schrodinger_apply_nb(u, potential, idx, strides, inv_h2):
    out = np.zeros_like(u)
    two_n = 2.0 * strides.size
    for t in range(idx.size):
        i = idx[t]
        acc = two_n * u[i]
        for s in strides:
            acc -= u[i + s] + u[i - s]
        out[i] = acc * inv_h2 + potential[i] * u[i]
    return out


@njit
def _drift_apply_nb(u, drift, zeroth, idx, strides, inv_h2, inv_2h):
    out = np.zeros_like(u)
    two_n = 2.0 * strides.size
    for t in range(idx.size):
        i = idx[t]
        acc = two_n * u[i]
        for s in strides:
            acc -= u[i + s] + u[i - s]
        acc *= inv_h2
        for k in range(strides.size):
            s = strides[k]
            acc += drift[k, i] * (u[i + s] - u[i - s]) * inv_2h
        out[i] = acc + zeroth[i] * u[i]
    return out


@njit
def _cg_graph_laplace_nb(b, idx, strides, tol, maxiter):
    x = np.zeros_like(b)
    r = b.copy()
    p = b.copy()
    ap = np.zeros_like(b)
    rr = 0.0
    for t in range(idx.size):
        rr += r[idx[t]] ** 2
    bnorm = np.sqrt(rr)
    if bnorm == 0.0:
        return x, 0, 0.0
    for it in range(maxiter):
        _graph_laplace_nb(p, idx, strides, ap)
        pap = 0.0
        for t in range(idx.size):
            i = idx[t]
            pap += p[i] * ap[i]
        alpha = rr / pap
        rr_new = 0.0
        for t in range(idx.size):
            i = idx[t]
            x[i] += alpha * p[i]
            r[i] -= alpha * ap[i]
            rr_new += r[i] * r[i]
        rel = np.sqrt(rr_new) / bnorm
        if rel <= tol:
            return x, it + 1, rel
        beta = rr_new / rr
        rr = rr_new
        for t in range(idx.size):
            i = idx[t]
            p[i] = r[i] + beta * p[i]
    return x, maxiter, np.sqrt(rr) / bnorm


# --------------------------------------------------------------------------
# numpy versions

def _neighbour_sum_np(u, strides):
    acc = np.zeros_like(u)
    for s in strides:
        acc += np.roll(u, -int(s))
        acc += np.roll(u, int(s))
    return acc


def _masked(values, idx):
    out = np.zeros_like(values)
    out[idx] = values[idx]
    return out


def _schrodinger_apply_np(u, potential, idx, strides, inv_h2):
    two_n = 2.0 * len(strides)
    full = (two_n * u - _neighbour_sum_np(u, strides)) * inv_h2 + potential * u
    return _masked(full, idx)


def _drift_apply_np(u, drift, zeroth, idx, strides, inv_h2, inv_2h):
    two_n = 2.0 * len(strides)
    full = (two_n * u - _neighbour_sum_np(u, strides)) * inv_h2
    for k, s in enumerate(strides):
        full += drift[k] * (np.roll(u, -int(s)) - np.roll(u, int(s))) * inv_2h
    full += zeroth * u
    return _masked(full, idx)


def _cg_graph_laplace_np(b, idx, strides, tol, maxiter):
    two_n = 2.0 * len(strides)

    def apply(v):
        return _masked(two_n * v - _neighbour_sum_np(v, strides), idx)

    x = np.zeros_like(b)
    r = b.copy()
    p = b.copy()
    rr = float(r[idx] @ r[idx])
    bnorm = np.sqrt(rr)
    if bnorm == 0.0:
        return x, 0, 0.0
    for it in range(maxiter):
        ap = apply(p)
        alpha = rr / float(p[idx] @ ap[idx])
        x += alpha * p
        r -= alpha * ap
        rr_new = float(r[idx] @ r[idx])
        rel = np.sqrt(rr_new) / bnorm
        if rel <= tol:
            return x, it + 1, rel
        p = r + (rr_new / rr) * p
        rr = rr_new
    return x, maxiter, np.sqrt(rr) / bnorm


if NUMBA_ENABLED:
    schrodinger_apply = _schrodinger_apply_nb
    drift_apply = _drift_apply_nb
    cg_graph_laplace = _cg_graph_laplace_nb
else:
    schrodinger_apply = _schrodinger_apply_np
    drift_apply = _drift_apply_np
    cg_graph_laplace = _cg_graph_laplace_np

BACKEND = "numba" if NUMBA_ENABLED else "numpy"
