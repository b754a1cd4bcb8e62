"""Compiled inner loops. All take plain float64 arrays and release the GIL."""

import math

import numpy as np
from numba import njit

PIVOT_FLOOR = 1e-300


@njit(cache=True, nogil=True)
def product(E, v):
    """T_{v[-1]} ... T_{v[0]} renormalized by the max-abs entry after every step.

    Returns (m11, m12, m21, m22, log_scale, log_det) where log_det tracks
    log|det(body)| through det(T) and the renormalizers; for long products
    the body is numerically rank one and its determinant cannot be read off
    its entries.
    """
    m11, m12, m21, m22 = 1.0, 0.0, 0.0, 1.0
    log_scale = 0.0
    log_det = 0.0
    for k in range(v.size):
        a = E - v[k]
        n11 = a * m11 - m21
        n12 = a * m12 - m22
        n21 = m11
        n22 = m12
        s = max(abs(n11), abs(n12), abs(n21), abs(n22))
        m11 = n11 / s
        m12 = n12 / s
        m21 = n21 / s
        m22 = n22 / s
        ls = math.log(s)
        log_scale += ls
        log_det += math.log(abs(a * 0.0 - (-1.0) * 1.0)) - 2.0 * ls
    return m11, m12, m21, m22, log_scale, log_det


@njit(cache=True, nogil=True)
def apply(E, v, x0, x1):
    """Image of (x0, x1) under the product: (log_norm, u0, u1), u a unit vector."""
    acc = 0.0
    for k in range(v.size):
        y0 = (E - v[k]) * x0 - x1
        x1 = x0
        x0 = y0
        s = max(abs(x0), abs(x1))
        x0 /= s
        x1 /= s
        acc += math.log(s)
    r = math.hypot(x0, x1)
    return acc + math.log(r), x0 / r, x1 / r


@njit(cache=True, nogil=True)
def op_norm(m11, m12, m21, m22):
    """Spectral norm of a 2x2 matrix."""
    f = m11 * m11 + m12 * m12 + m21 * m21 + m22 * m22
    d = abs(m11 * m22 - m12 * m21)
    disc = max(f * f - 4.0 * d * d, 0.0)
    return math.sqrt(0.5 * (f + math.sqrt(disc)))


@njit(cache=True, nogil=True)
def log_norm_product(E, v):
    m11, m12, m21, m22, ls, _ = product(E, v)
    return ls + math.log(op_norm(m11, m12, m21, m22))


@njit(cache=True, nogil=True)
def log_norm_blocks(E, v, block):
    """log||T_{[0, k*block]}|| for k = 1..len(v)//block."""
    nb = v.size // block
    out = np.empty(nb)
    m11, m12, m21, m22 = 1.0, 0.0, 0.0, 1.0
    log_scale = 0.0
    for k in range(nb * block):
        a = E - v[k]
        n11 = a * m11 - m21
        n12 = a * m12 - m22
        n21 = m11
        n22 = m12
        s = max(abs(n11), abs(n12), abs(n21), abs(n22))
        m11 = n11 / s
        m12 = n12 / s
        m21 = n21 / s
        m22 = n22 / s
        log_scale += math.log(s)
        if (k + 1) % block == 0:
            out[(k + 1) // block - 1] = log_scale + math.log(op_norm(m11, m12, m21, m22))
    return out


@njit(cache=True, nogil=True)
def sturm_count(diag, E):
    """Number of eigenvalues strictly below E (off-diagonals all 1)."""
    count = 0
    d = 1.0
    for i in range(diag.size):
        if i == 0:
            d = diag[0] - E
        else:
            d = (diag[i] - E) - 1.0 / d
        if abs(d) < PIVOT_FLOOR:
            d = -PIVOT_FLOOR if d < 0.0 else PIVOT_FLOOR
        if d < 0.0:
            count += 1
    return count


@njit(cache=True, nogil=True)
def bisect_eigenvalue(diag, k, lo, hi, tol_abs, tol_rel, anchor):
    """k-th eigenvalue (0-based) bracketed by count(lo) <= k < count(hi).

    Stops when hi - lo <= tol_abs and, if tol_rel > 0, also
    hi - lo <= tol_rel * dist([lo, hi], anchor); or when the bracket cannot be
    split further in floating point.
    """
    while True:
        width = hi - lo
        gap = max(lo - anchor, anchor - hi, 0.0)
        if width <= tol_abs and (tol_rel == 0.0 or width <= tol_rel * gap):
            break
        mid = lo + 0.5 * width
        if mid <= lo or mid >= hi:
            break
        if sturm_count(diag, mid) > k:
            hi = mid
        else:
            lo = mid
    return lo, hi
