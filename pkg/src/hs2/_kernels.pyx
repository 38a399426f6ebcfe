# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: trigonometric evaluation at scattered points and
per-point inversion of circle-map lifts."""
import numpy as np

from libc.math cimport cos, sin, fabs, M_PI


cdef inline void _horner(const double[::1] cre, const double[::1] cim,
                         double y, double* val) noexcept nogil:
    cdef Py_ssize_t k, m = cre.shape[0]
    cdef double zr = cos(2.0 * M_PI * y)
    cdef double zi = sin(2.0 * M_PI * y)
    cdef double pr = cre[m - 1]
    cdef double pi = cim[m - 1]
    cdef double tr
    for k in range(m - 2, -1, -1):
        tr = pr * zr - pi * zi + cre[k]
        pi = pr * zi + pi * zr + cim[k]
        pr = tr
    val[0] = pr


def trig_eval(const double[::1] cre, const double[::1] cim, const double[::1] points):
    """Real part of sum_k c_k exp(2 pi i k y) for each y in ``points``."""
    cdef Py_ssize_t i, n = points.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double v
    with nogil:
        for i in range(n):
            _horner(cre, cim, points[i], &v)
            o[i] = v
    return out


def invert_lift(const double[::1] cre, const double[::1] cim,
                const double[::1] dre, const double[::1] dim,
                const double[::1] targets, double vmax,
                double tol, int max_iter):
    """Solve y + v(y) = x for every target x.

    ``(cre, cim)`` are the coefficients of v and ``(dre, dim)`` those of v'.
    Newton steps are safeguarded by a bracket and fall back to bisection.
    Returns the solutions and a per-point convergence flag.
    """
    cdef Py_ssize_t i, n = targets.shape[0]
    cdef int it
    cdef double x, y, lo, hi, g, dg, v, dv, ynew, pad
    out = np.empty(n, dtype=np.float64)
    flags = np.zeros(n, dtype=np.uint8)
    cdef double[::1] o = out
    cdef unsigned char[::1] f = flags
    pad = 1e-12 + 4.0 * tol
    with nogil:
        for i in range(n):
            x = targets[i]
            lo = x - vmax - pad
            hi = x + vmax + pad
            _horner(cre, cim, x, &v)
            y = x - v
            if y <= lo or y >= hi:
                y = 0.5 * (lo + hi)
            for it in range(max_iter):
                _horner(cre, cim, y, &v)
                g = y + v - x
                if fabs(g) <= tol:
                    f[i] = 1
                    break
                if g < 0.0:
                    lo = y
                else:
                    hi = y
                _horner(dre, dim, y, &dv)
                dg = 1.0 + dv
                if dg > 0.0:
                    ynew = y - g / dg
                else:
                    ynew = 0.5 * (lo + hi)
                if ynew <= lo or ynew >= hi:
                    ynew = 0.5 * (lo + hi)
                if hi - lo <= tol:
                    y = ynew
                    f[i] = 1
                    break
                y = ynew
            o[i] = y
    return out, flags
