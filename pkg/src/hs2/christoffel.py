"""Christoffel maps and right-invariant metrics for HS, muHS, 2HS and 2muHS.

At the identity every map has the form

    Gamma(X, Y) = ( -A^{-1} (G(X, Y))_x ,  -1/2 (X1_x Y2 + Y1_x X2) )

with G = 1/2 X1_x Y1_x + 1/2 X2 Y2 (+ mu(X1) Y1 + mu(Y1) X1 when A = mu - d^2/dx^2).
One-component equations are the same maps restricted to zero second
components. At a base point (phi, f) the map is conjugated by phi.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from hs2.errors import ChartViolation
from hs2.field import (InertiaOperatorKind, PeriodicField, antiderivative, derivative,
                       inverse_inertia, mean)
from hs2.group import GroupElement, TangentPair, diffeo_invert, invert_point


class EquationKind(enum.Enum):
    HS = "HS"
    MU_HS = "MuHS"
    TWO_HS = "TwoHS"
    TWO_MU_HS = "TwoMuHS"

    @property
    def two_component(self) -> bool:
        return self in (EquationKind.TWO_HS, EquationKind.TWO_MU_HS)

    @property
    def inertia(self) -> InertiaOperatorKind:
        if self in (EquationKind.HS, EquationKind.TWO_HS):
            return InertiaOperatorKind.NEG_DXX
        return InertiaOperatorKind.MU_MINUS_DXX

    @property
    def uses_mean(self) -> bool:
        return self.inertia is InertiaOperatorKind.MU_MINUS_DXX

    @property
    def chart(self) -> bool:
        """First components must vanish at x = 0 (quotient by rotations)."""
        return not self.uses_mean

    @classmethod
    def parse(cls, name) -> "EquationKind":
        if isinstance(name, cls):
            return name
        key = str(name).replace("-", "").replace("_", "").replace("μ", "mu").lower()
        for kind in cls:
            if kind.value.lower() == key or kind.name.replace("_", "").lower() == key:
                return kind
        aliases = {"2hs": cls.TWO_HS, "2muhs": cls.TWO_MU_HS}
        if key in aliases:
            return aliases[key]
        raise ValueError(f"unknown equation kind {name!r}")


@dataclass(frozen=True)
class MetricConvention:
    """Weight on the first-component (inertia-operator) form.

    ``h1_scale=1`` is the natural two-component normalization (2HS curvature
    1/4); ``h1_scale=0.25`` reproduces the classical HS normalization with
    curvature 1.
    """

    h1_scale: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.h1_scale) and self.h1_scale > 0):
            raise ValueError(f"h1_scale must be positive, got {self.h1_scale}")


DEFAULT_CONVENTION = MetricConvention()


def chart_tolerance(u: PeriodicField) -> float:
    return 1e-10 * (1.0 + u.sup_norm())


def check_chart(kind: EquationKind, *tangents: TangentPair) -> None:
    if not kind.chart:
        return
    for t in tangents:
        if abs(t.u1.at_zero()) > chart_tolerance(t.u1):
            raise ChartViolation(
                f"{kind.value}: first component must vanish at 0, got {t.u1.at_zero():.3e}")


def _restrict(kind: EquationKind, t: TangentPair) -> TangentPair:
    if kind.two_component:
        return t
    return TangentPair.first(t.u1)


def christoffel_id(kind: EquationKind, X: TangentPair, Y: TangentPair,
                   check: bool = True) -> TangentPair:
    """Right-invariant Christoffel map at the identity."""
    kind = EquationKind.parse(kind)
    if check:
        check_chart(kind, X, Y)
    X, Y = _restrict(kind, X), _restrict(kind, Y)
    x1x, y1x = derivative(X.u1), derivative(Y.u1)
    src = 0.5 * (x1x * y1x)
    if kind.two_component:
        src = src + 0.5 * (X.u2 * Y.u2)
    if kind.uses_mean:
        src = src + mean(X.u1) * Y.u1 + mean(Y.u1) * X.u1
    first = -inverse_inertia(kind.inertia, derivative(src))
    if kind.two_component:
        second = -0.5 * (x1x * Y.u2 + y1x * X.u2)
    else:
        second = PeriodicField.zeros(X.n)
    return TangentPair(first, second)


def christoffel_at(kind: EquationKind, base: GroupElement, X: TangentPair,
                   Y: TangentPair, check: bool = True) -> TangentPair:
    """Gamma_(phi,f)(X, Y) = Gamma(X o phi^-1, Y o phi^-1) o phi."""
    kind = EquationKind.parse(kind)
    phi = base.phi
    if phi.is_identity:
        return christoffel_id(kind, X, Y, check=check)
    phi_inv = diffeo_invert(phi)
    g = christoffel_id(kind, X.compose(phi_inv), Y.compose(phi_inv), check=check)
    return g.compose(phi)


def _pulled_back_inverse(kind: EquationKind, base: GroupElement,
                         source: PeriodicField) -> PeriodicField:
    """(A^{-1} g_x) o phi from G = g o phi, without inverting phi.

    With J = phi_x and H = G J, the Eulerian antiderivative of g pulls back
    to the Lagrangian antiderivative of H, so (A^{-1} g_x) o phi equals
    -Q + const where Q = P[H] - mean(H) v, P[.] the periodic antiderivative
    and v the displacement of phi. The constant is fixed by the inertia
    operator: w(0) = 0 for -d^2/dx^2, zero Eulerian mean for mu - d^2/dx^2.
    """
    phi = base.phi
    jac = phi.slope()
    h = source * jac
    q = antiderivative(h) - mean(h) * phi.displacement
    if kind.inertia is InertiaOperatorKind.NEG_DXX:
        if phi.base_point_fixed or abs(phi.displacement.at_zero()) < 1e-14:
            return -q
        x0 = invert_point(phi, 0.0)
        return float(q.evaluate(np.array([x0]))[0]) - q
    return mean(q * jac) - q


def christoffel_lagrangian(kind: EquationKind, base: GroupElement, X: TangentPair,
                           Y: TangentPair) -> TangentPair:
    """Same map as :func:`christoffel_at`, evaluated by change of variables.

    Never inverts phi on the grid, so it stays resolved when phi_x becomes
    small (near wave breaking), where conjugation would need a steep phi^-1.
    """
    kind = EquationKind.parse(kind)
    X, Y = _restrict(kind, X), _restrict(kind, Y)
    jac = base.phi.slope()
    x1x, y1x = derivative(X.u1), derivative(Y.u1)
    src = 0.5 * (x1x * y1x) / (jac * jac)
    if kind.two_component:
        src = src + 0.5 * (X.u2 * Y.u2)
    if kind.uses_mean:
        src = src + mean(X.u1 * jac) * Y.u1 + mean(Y.u1 * jac) * X.u1
    first = -_pulled_back_inverse(kind, base, src)
    if kind.two_component:
        second = -0.5 * (x1x * Y.u2 + y1x * X.u2) / jac
    else:
        second = PeriodicField.zeros(X.n)
    return TangentPair(first, second)


def metric(kind: EquationKind, conv: MetricConvention, base: GroupElement | None,
           U: TangentPair, V: TangentPair) -> float:
    """Right-invariant inner product of U, V in the tangent space at ``base``."""
    kind = EquationKind.parse(kind)
    conv = conv or DEFAULT_CONVENTION
    U, V = _restrict(kind, U), _restrict(kind, V)
    if base is None or base.phi.is_identity:
        jac = None
        first = mean(derivative(U.u1) * derivative(V.u1))
        if kind.uses_mean:
            first += mean(U.u1) * mean(V.u1)
        second = mean(U.u2 * V.u2) if kind.two_component else 0.0
    else:
        jac = base.phi.slope()
        first = mean(derivative(U.u1) * derivative(V.u1) / jac)
        if kind.uses_mean:
            first += mean(U.u1 * jac) * mean(V.u1 * jac)
        second = mean(U.u2 * V.u2 * jac) if kind.two_component else 0.0
    return conv.h1_scale * first + second


def norm(kind: EquationKind, conv: MetricConvention, base, U: TangentPair) -> float:
    return float(np.sqrt(max(metric(kind, conv, base, U, U), 0.0)))
