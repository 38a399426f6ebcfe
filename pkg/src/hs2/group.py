"""Circle diffeomorphisms and the semidirect product Diff(S^1) x| C^inf(S^1).

A diffeomorphism is stored as phi(x) = x + v(x) with v periodic. The group
law on pairs is (phi1, f1)(phi2, f2) = (phi1 o phi2, f2 + f1 o phi2).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from hs2 import _backend
from hs2.errors import ChartViolation, NewtonDivergence, OrientationLost
from hs2.field import DEFAULT_N, PeriodicField, compose, derivative, grid

SLOPE_FLOOR = 1e-6
NEWTON_TOL = 1e-13
NEWTON_MAX_ITER = 50
BASE_POINT_TOL = 1e-12


class CircleDiffeo:
    """Orientation-preserving circle map x -> x + v(x)."""

    __slots__ = ("displacement", "base_point_fixed", "_slope")

    def __init__(self, displacement: PeriodicField, base_point_fixed: bool = False,
                 check: bool = True):
        if not isinstance(displacement, PeriodicField):
            displacement = PeriodicField(displacement)
        self.displacement = displacement
        self.base_point_fixed = bool(base_point_fixed)
        self._slope = None
        if check:
            self.validate()

    def validate(self, slope_floor: float = SLOPE_FLOOR) -> None:
        m = self.min_slope()
        if not m > slope_floor:
            raise OrientationLost(f"min slope {m:.3e} <= floor {slope_floor:.1e}")
        if self.base_point_fixed and abs(self.displacement.at_zero()) >= BASE_POINT_TOL:
            raise ChartViolation(
                f"base point moved: phi(0) = {self.displacement.at_zero():.3e}")

    @classmethod
    def identity(cls, n: int = DEFAULT_N) -> "CircleDiffeo":
        return cls(PeriodicField.zeros(n), base_point_fixed=True, check=False)

    @classmethod
    def rotation(cls, c: float, n: int = DEFAULT_N) -> "CircleDiffeo":
        return cls(PeriodicField.constant(c, n), base_point_fixed=(c == 0.0), check=False)

    @classmethod
    def from_displacement(cls, func, n: int = DEFAULT_N, **kw) -> "CircleDiffeo":
        return cls(PeriodicField.from_function(func, n), **kw)

    @property
    def n(self) -> int:
        return self.displacement.n

    @property
    def is_identity(self) -> bool:
        return not np.any(self.displacement.samples)

    def values(self) -> np.ndarray:
        """phi at the grid points (lifted, not reduced mod 1)."""
        return grid(self.n) + self.displacement.samples

    def __call__(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64)
        return pts + self.displacement.evaluate(pts)

    def slope(self) -> PeriodicField:
        if self._slope is None:
            self._slope = 1.0 + derivative(self.displacement)
        return self._slope

    def min_slope(self) -> float:
        return float(np.min(self.slope().samples))

    def compose(self, other: "CircleDiffeo") -> "CircleDiffeo":
        return diffeo_compose(self, other)

    def inverse(self) -> "CircleDiffeo":
        return diffeo_invert(self)

    def __matmul__(self, other):
        return diffeo_compose(self, other)

    def distance(self, other: "CircleDiffeo") -> float:
        return float(np.max(np.abs(self.displacement.samples - other.displacement.samples)))

    def __repr__(self) -> str:
        return f"CircleDiffeo(N={self.n}, min_slope={self.min_slope():.4g})"


def diffeo_compose(phi1: CircleDiffeo, phi2: CircleDiffeo) -> CircleDiffeo:
    """phi1 o phi2."""
    if phi2.is_identity:
        return phi1
    if phi1.is_identity:
        return phi2
    v = compose(phi1.displacement, phi2) + phi2.displacement
    out = CircleDiffeo(v, phi1.base_point_fixed and phi2.base_point_fixed, check=False)
    m = out.min_slope()
    if not m > SLOPE_FLOOR:
        raise OrientationLost(f"composition lost orientation (min slope {m:.3e})")
    return out


def _sup_bound(cre, cim) -> float:
    # the interpolant can exceed the largest sample between grid points
    return float(np.sum(np.hypot(cre, cim)))


def diffeo_invert(phi: CircleDiffeo, tol: float = NEWTON_TOL,
                  max_iter: int = NEWTON_MAX_ITER) -> CircleDiffeo:
    """phi^{-1}, solving y + v(y) = x_j point by point."""
    if phi.is_identity:
        return phi
    m = phi.min_slope()
    if not m > SLOPE_FLOOR:
        raise OrientationLost(f"cannot invert: min slope {m:.3e}")
    v = phi.displacement
    x = grid(phi.n)
    cre, cim = v.interpolation_coefficients()
    dre, dim = v.interpolation_coefficients(order=1)
    y, ok = _backend.kernels.invert_lift(cre, cim, dre, dim, x, _sup_bound(cre, cim),
                                         tol, max_iter)
    if not np.all(ok):
        bad = int(np.count_nonzero(ok == 0))
        raise NewtonDivergence(f"lift inversion failed at {bad} grid points")
    w = y - x
    if phi.base_point_fixed:
        w[0] = 0.0
    return CircleDiffeo(PeriodicField._wrap(w), phi.base_point_fixed, check=False)


def invert_point(phi: CircleDiffeo, target: float, tol: float = NEWTON_TOL) -> float:
    """Single preimage phi^{-1}(target) on the lift."""
    v = phi.displacement
    cre, cim = v.interpolation_coefficients()
    dre, dim = v.interpolation_coefficients(order=1)
    y, ok = _backend.kernels.invert_lift(cre, cim, dre, dim, np.array([float(target)]),
                                         _sup_bound(cre, cim), tol, NEWTON_MAX_ITER)
    if not ok[0]:
        raise NewtonDivergence("point inversion failed")
    return float(y[0])


@dataclass(frozen=True, eq=False)
class TangentPair:
    """Tangent vector (u1, u2): vector-field part and scalar-function part."""

    u1: PeriodicField
    u2: PeriodicField

    def __post_init__(self):
        if self.u1.n != self.u2.n:
            raise ValueError(f"component grids differ: {self.u1.n} vs {self.u2.n}")

    @classmethod
    def zeros(cls, n: int = DEFAULT_N) -> "TangentPair":
        z = PeriodicField.zeros(n)
        return cls(z, z)

    @classmethod
    def first(cls, u1: PeriodicField) -> "TangentPair":
        return cls(u1, PeriodicField.zeros(u1.n))

    @classmethod
    def second(cls, u2: PeriodicField) -> "TangentPair":
        return cls(PeriodicField.zeros(u2.n), u2)

    @property
    def n(self) -> int:
        return self.u1.n

    def __add__(self, other: "TangentPair") -> "TangentPair":
        return TangentPair(self.u1 + other.u1, self.u2 + other.u2)

    def __sub__(self, other: "TangentPair") -> "TangentPair":
        return TangentPair(self.u1 - other.u1, self.u2 - other.u2)

    def __neg__(self) -> "TangentPair":
        return TangentPair(-self.u1, -self.u2)

    def __mul__(self, s) -> "TangentPair":
        if isinstance(s, PeriodicField):
            return TangentPair(self.u1 * s, self.u2 * s)
        s = float(s)
        return TangentPair(self.u1 * s, self.u2 * s)

    __rmul__ = __mul__

    def __truediv__(self, s: float) -> "TangentPair":
        return self * (1.0 / float(s))

    def derivative(self) -> "TangentPair":
        return TangentPair(derivative(self.u1), derivative(self.u2))

    def compose(self, phi: CircleDiffeo) -> "TangentPair":
        return TangentPair(compose(self.u1, phi), compose(self.u2, phi))

    def sup_norm(self) -> float:
        return max(self.u1.sup_norm(), self.u2.sup_norm())

    def as_array(self) -> np.ndarray:
        return np.stack([self.u1.samples, self.u2.samples])

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "TangentPair":
        return cls(PeriodicField._wrap(arr[0]), PeriodicField._wrap(arr[1]))


@dataclass(frozen=True, eq=False)
class GroupElement:
    """(phi, f) in the semidirect product."""

    phi: CircleDiffeo
    f: PeriodicField

    def __post_init__(self):
        if self.phi.n != self.f.n:
            raise ValueError("component grids differ")

    @classmethod
    def identity(cls, n: int = DEFAULT_N) -> "GroupElement":
        return cls(CircleDiffeo.identity(n), PeriodicField.zeros(n))

    @property
    def n(self) -> int:
        return self.f.n

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return group_product(self, other)

    def inverse(self) -> "GroupElement":
        return group_inverse(self)

    def distance(self, other: "GroupElement") -> float:
        return max(self.phi.distance(other.phi),
                   float(np.max(np.abs(self.f.samples - other.f.samples))))


def group_product(a: GroupElement, b: GroupElement) -> GroupElement:
    return GroupElement(diffeo_compose(a.phi, b.phi), b.f + compose(a.f, b.phi))


def group_inverse(a: GroupElement) -> GroupElement:
    phi_inv = diffeo_invert(a.phi)
    return GroupElement(phi_inv, -compose(a.f, phi_inv))


def adjoint(a: GroupElement, t: TangentPair) -> TangentPair:
    """Ad_(phi,f)(u, rho) = ((phi_x u) o phi^{-1}, (f_x u + rho) o phi^{-1})."""
    phi_inv = diffeo_invert(a.phi)
    first = compose(a.phi.slope() * t.u1, phi_inv)
    second = compose(derivative(a.f) * t.u1 + t.u2, phi_inv)
    return TangentPair(first, second)


def lie_bracket(u: PeriodicField, v: PeriodicField) -> PeriodicField:
    """[u, v] = v_x u - u_x v on vector fields."""
    return derivative(v) * u - derivative(u) * v


def ad_bracket(s: TangentPair, t: TangentPair) -> TangentPair:
    """[(u1, u2), (v1, v2)] = ([u1, v1], v2_x u1 - u2_x v1)."""
    return TangentPair(lie_bracket(s.u1, t.u1),
                       derivative(t.u2) * s.u1 - derivative(s.u2) * t.u1)


def exp_approx(t: TangentPair, eps: float) -> GroupElement:
    """First-order curve (id + eps t1, eps t2) through the identity."""
    phi = CircleDiffeo(eps * t.u1, base_point_fixed=abs(t.u1.at_zero()) < BASE_POINT_TOL)
    return GroupElement(phi, eps * t.u2)
