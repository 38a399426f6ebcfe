"""Pure-numpy versions of the compiled kernels (same signatures)."""
import numpy as np

_CHUNK = 256


def _phases(points, m):
    k = np.arange(m)
    return np.exp(2j * np.pi * np.outer(points, k))


def trig_eval(cre, cim, points):
    """Real part of sum_k c_k exp(2 pi i k y) for each y in ``points``."""
    points = np.asarray(points, dtype=np.float64)
    coeffs = np.asarray(cre) + 1j * np.asarray(cim)
    out = np.empty(points.shape[0])
    for start in range(0, points.shape[0], _CHUNK):
        sl = slice(start, start + _CHUNK)
        out[sl] = (_phases(points[sl], coeffs.shape[0]) @ coeffs).real
    return out


def invert_lift(cre, cim, dre, dim, targets, vmax, tol, max_iter):
    """Vectorized safeguarded Newton solve of y + v(y) = x."""
    x = np.asarray(targets, dtype=np.float64)
    pad = 1e-12 + 4.0 * tol
    lo = x - vmax - pad
    hi = x + vmax + pad
    y = x - trig_eval(cre, cim, x)
    outside = (y <= lo) | (y >= hi)
    y[outside] = 0.5 * (lo[outside] + hi[outside])
    done = np.zeros(x.shape[0], dtype=bool)
    for _ in range(max_iter):
        active = ~done
        if not active.any():
            break
        ya = y[active]
        g = ya + trig_eval(cre, cim, ya) - x[active]
        conv = np.abs(g) <= tol
        lo_a, hi_a = lo[active], hi[active]
        lo_a = np.where(g < 0.0, ya, lo_a)
        hi_a = np.where(g < 0.0, hi_a, ya)
        dg = 1.0 + trig_eval(dre, dim, ya)
        with np.errstate(divide="ignore", invalid="ignore"):
            ynew = np.where(dg > 0.0, ya - g / dg, 0.5 * (lo_a + hi_a))
        bad = (ynew <= lo_a) | (ynew >= hi_a)
        ynew[bad] = 0.5 * (lo_a[bad] + hi_a[bad])
        narrow = (hi_a - lo_a) <= tol
        ynew = np.where(conv, ya, ynew)
        lo[active], hi[active] = lo_a, hi_a
        y[active] = ynew
        done[np.flatnonzero(active)[conv | narrow]] = True
    return y, done.astype(np.uint8)
