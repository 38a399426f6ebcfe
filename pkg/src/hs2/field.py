"""Real periodic functions on the unit circle R/Z sampled on a uniform grid.

All calculus is spectral: a field with N samples is identified with its
trigonometric interpolant of degree < N/2 (the Nyquist mode is kept as a
pure cosine for interpolation and dropped by differentiation).
"""
from __future__ import annotations

import enum

import numpy as np

from hs2 import _backend
from hs2.errors import NonZeroMean

DEFAULT_N = 256
MIN_N = 16


class InertiaOperatorKind(enum.Enum):
    """Which inertia operator A is inverted.

    NEG_DXX is -d^2/dx^2 on functions vanishing at 0; MU_MINUS_DXX is
    mean(.) - d^2/dx^2 on all periodic functions.
    """

    NEG_DXX = "NegDxx"
    MU_MINUS_DXX = "MuMinusDxx"


def grid(n: int) -> np.ndarray:
    return np.arange(n) / n


def _check_n(n: int) -> None:
    if n < MIN_N or n & (n - 1):
        raise ValueError(f"grid size must be a power of two >= {MIN_N}, got {n}")


def _wavenumbers(n: int) -> np.ndarray:
    """Angular wavenumbers 2*pi*k of the rfft layout."""
    return 2.0 * np.pi * np.arange(n // 2 + 1)


class PeriodicField:
    """Samples f(j/N), j = 0..N-1, of a real 1-periodic function.

    Instances are immutable; arithmetic returns new fields.
    """

    __slots__ = ("samples", "_coef")
    __array_priority__ = 100

    def __init__(self, samples):
        arr = np.array(samples, dtype=np.float64)
        if arr.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        _check_n(arr.shape[0])
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        arr.flags.writeable = False
        self.samples = arr
        self._coef = None

    # -- construction -------------------------------------------------
    @classmethod
    def from_function(cls, func, n: int = DEFAULT_N) -> "PeriodicField":
        return cls(func(grid(n)))

    @classmethod
    def constant(cls, value: float, n: int = DEFAULT_N) -> "PeriodicField":
        return cls(np.full(n, float(value)))

    @classmethod
    def zeros(cls, n: int = DEFAULT_N) -> "PeriodicField":
        return cls(np.zeros(n))

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> "PeriodicField":
        # internal constructor: skips the copy, keeps validation cheap
        obj = cls.__new__(cls)
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        arr.flags.writeable = False
        obj.samples = arr
        obj._coef = None
        return obj

    # -- basic properties ---------------------------------------------
    @property
    def n(self) -> int:
        return self.samples.shape[0]

    N = n

    @property
    def x(self) -> np.ndarray:
        return grid(self.n)

    def coefficients(self) -> np.ndarray:
        """rfft of the samples (cached)."""
        if self._coef is None:
            self._coef = np.fft.rfft(self.samples)
            self._coef.flags.writeable = False
        return self._coef

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def at_zero(self) -> float:
        return float(self.samples[0])

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"PeriodicField(N={self.n}, mean={self.mean():.6g}, sup={self.sup_norm():.6g})"

    # -- arithmetic ---------------------------------------------------
    def _other(self, other):
        if isinstance(other, PeriodicField):
            if other.n != self.n:
                other = other.resample(self.n)
            return other.samples
        if isinstance(other, np.ndarray) and other.ndim == 1:
            if other.shape[0] != self.n:
                raise ValueError(f"length {other.shape[0]} does not match N={self.n}")
            return other
        return float(other)

    def __add__(self, other):
        return PeriodicField._wrap(self.samples + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return PeriodicField._wrap(self.samples - self._other(other))

    def __rsub__(self, other):
        return PeriodicField._wrap(self._other(other) - self.samples)

    def __neg__(self):
        return PeriodicField._wrap(-self.samples)

    def __mul__(self, other):
        if isinstance(other, PeriodicField):
            return multiply(self, other)
        return PeriodicField._wrap(self.samples * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return PeriodicField._wrap(self.samples / self._other(other))

    def __pow__(self, p):
        return PeriodicField._wrap(self.samples ** p)

    def allclose(self, other, atol=1e-12) -> bool:
        return bool(np.max(np.abs(self.samples - self._other(other))) <= atol)

    # -- calculus -----------------------------------------------------
    def derivative(self) -> "PeriodicField":
        return derivative(self)

    def mean(self) -> float:
        return mean(self)

    def integral(self) -> "PeriodicField":
        return antiderivative(self)

    def shift(self, c: float) -> "PeriodicField":
        """The field x -> f(x - c)."""
        n = self.n
        coef = self.coefficients() * np.exp(-1j * _wavenumbers(n) * c)
        if n % 2 == 0:
            coef[-1] = self.coefficients()[-1] * np.cos(np.pi * n * c)
        return PeriodicField._wrap(np.fft.irfft(coef, n))

    def resample(self, n: int) -> "PeriodicField":
        """Fourier interpolation (or truncation) onto an n-point grid."""
        if n == self.n:
            return self
        _check_n(n)
        coef = self.coefficients()
        m = min(n, self.n) // 2
        out = np.zeros(n // 2 + 1, dtype=complex)
        out[:m] = coef[:m]
        if n > self.n:
            # split the old Nyquist cosine evenly between +/- frequencies
            out[m] = coef[m].real * 0.5
        else:
            # only the cosine part of frequency n/2 survives on the coarse grid
            out[m] = 2.0 * coef[m].real
        return PeriodicField._wrap(np.fft.irfft(out * (n / self.n), n))

    def interpolation_coefficients(self, order: int = 0):
        """Coefficients c_k with f(y) = Re sum_k c_k exp(2 pi i k y)."""
        n = self.n
        c = self.coefficients() / n
        c = c.copy()
        c[1 : n // 2] *= 2.0
        if order:
            c = c * (1j * _wavenumbers(n)) ** order
            c[-1] = 0.0
        return np.ascontiguousarray(c.real), np.ascontiguousarray(c.imag)

    def evaluate(self, points, order: int = 0) -> np.ndarray:
        """Trigonometric interpolant (or its derivative) at arbitrary points."""
        pts = np.ascontiguousarray(points, dtype=np.float64)
        cre, cim = self.interpolation_coefficients(order)
        return _backend.kernels.trig_eval(cre, cim, pts)

    def __call__(self, points) -> np.ndarray:
        return self.evaluate(points)

    def compose(self, phi) -> "PeriodicField":
        return compose(self, phi)


def _as_field(f) -> PeriodicField:
    if not isinstance(f, PeriodicField):
        raise TypeError(f"expected PeriodicField, got {type(f).__name__}")
    return f


def derivative(f: PeriodicField) -> PeriodicField:
    """Spectral d/dx; the Nyquist mode is discarded."""
    f = _as_field(f)
    n = f.n
    coef = f.coefficients() * (1j * _wavenumbers(n))
    coef[-1] = 0.0
    return PeriodicField._wrap(np.fft.irfft(coef, n))


def mean(f: PeriodicField) -> float:
    return float(np.mean(_as_field(f).samples))


def antiderivative(f: PeriodicField) -> PeriodicField:
    """Periodic antiderivative P of f - mean(f), normalized by P(0) = 0."""
    f = _as_field(f)
    n = f.n
    k = _wavenumbers(n)
    coef = np.zeros_like(f.coefficients())
    coef[1:] = f.coefficients()[1:] / (1j * k[1:])
    coef[-1] = 0.0
    p = np.fft.irfft(coef, n)
    return PeriodicField._wrap(p - p[0])


def multiply(f: PeriodicField, g: PeriodicField, dealias: bool = False) -> PeriodicField:
    """Pointwise product, optionally dealiased by 3/2 zero padding."""
    f, g = _as_field(f), _as_field(g)
    n = max(f.n, g.n)
    f, g = f.resample(n), g.resample(n)
    if not dealias:
        return PeriodicField._wrap(f.samples * g.samples)
    m = 2 * n  # smallest power of two >= 3n/2
    prod = f.resample(m).samples * g.resample(m).samples
    return PeriodicField._wrap(prod).resample(n)


def mean_tolerance(f: PeriodicField) -> float:
    return 1e-10 * (1.0 + f.sup_norm())


def inv_neg_dxx(f: PeriodicField) -> PeriodicField:
    """Solve -w'' = f with w(0) = 0; f must have zero mean."""
    f = _as_field(f)
    mu = mean(f)
    if abs(mu) > mean_tolerance(f):
        raise NonZeroMean(f"mean {mu:.3e} exceeds tolerance {mean_tolerance(f):.3e}")
    n = f.n
    k = _wavenumbers(n)
    coef = np.zeros_like(f.coefficients())
    coef[1:] = f.coefficients()[1:] / k[1:] ** 2
    w = np.fft.irfft(coef, n)
    return PeriodicField._wrap(w - w[0])


def inv_mu_minus_dxx(f: PeriodicField) -> PeriodicField:
    """Solve mean(w) - w'' = f."""
    f = _as_field(f)
    n = f.n
    k = _wavenumbers(n)
    coef = f.coefficients().copy()
    coef[1:] = coef[1:] / k[1:] ** 2
    return PeriodicField._wrap(np.fft.irfft(coef, n))


def inverse_inertia(kind: InertiaOperatorKind, f: PeriodicField) -> PeriodicField:
    if kind is InertiaOperatorKind.NEG_DXX:
        return inv_neg_dxx(f)
    if kind is InertiaOperatorKind.MU_MINUS_DXX:
        return inv_mu_minus_dxx(f)
    raise ValueError(f"unknown inertia operator {kind!r}")


def apply_inertia(kind: InertiaOperatorKind, w: PeriodicField) -> PeriodicField:
    """A w for either inertia operator."""
    a = -derivative(derivative(w))
    if kind is InertiaOperatorKind.MU_MINUS_DXX:
        a = a + mean(w)
    return a


def compose(f: PeriodicField, phi) -> PeriodicField:
    """Samples of f o phi, where ``phi`` is a circle diffeomorphism.

    ``phi`` may be any object exposing ``values()`` (phi at the grid points)
    or a plain array of target points.
    """
    f = _as_field(f)
    if hasattr(phi, "values"):
        if getattr(phi, "is_identity", False) and phi.n == f.n:
            return f
        pts = phi.values()
    else:
        pts = np.asarray(phi, dtype=np.float64)
    return PeriodicField._wrap(f.evaluate(pts))
