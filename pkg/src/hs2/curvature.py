"""Curvature tensor and sectional curvature at the identity.

Two routes are provided: the analytic expansion of the base-point derivative
of the conjugated Christoffel map, and a finite-difference oracle that
differentiates :func:`christoffel_at` along perturbed base points.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from hs2.christoffel import (DEFAULT_CONVENTION, EquationKind, MetricConvention,
                             check_chart, christoffel_at, christoffel_id, metric)
from hs2.errors import DegenerateSpan
from hs2.field import PeriodicField, derivative, inv_mu_minus_dxx, mean
from hs2.group import CircleDiffeo, GroupElement, TangentPair

FD_EPS = 1e-4
GRAM_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class CurvatureReport:
    R_uvw: TangentPair  # R(u, v) v
    unnormalized: float
    normalized: float | None
    gram_det: float

    def as_dict(self) -> dict:
        out = {"unnormalized": self.unnormalized, "gram_det": self.gram_det}
        if self.normalized is not None:
            out["normalized"] = self.normalized
        return out


def _dx_times(t: TangentPair, s: PeriodicField) -> TangentPair:
    """Componentwise (t1_x s, t2_x s)."""
    return TangentPair(derivative(t.u1) * s, derivative(t.u2) * s)


def _base_derivative(kind, w, u, v) -> TangentPair:
    # D_1 Gamma(w, u) in direction v at the identity
    gamma = lambda a, b: christoffel_id(kind, a, b, check=False)
    return (_dx_times(gamma(w, u), v.u1)
            - gamma(_dx_times(w, v.u1), u)
            - gamma(_dx_times(u, v.u1), w))


def curvature_tensor(kind: EquationKind, u: TangentPair, v: TangentPair,
                     w: TangentPair) -> TangentPair:
    """R(u, v) w at the identity via the analytic expansion."""
    kind = EquationKind.parse(kind)
    check_chart(kind, u, v, w)
    gamma = lambda a, b: christoffel_id(kind, a, b, check=False)
    return (_base_derivative(kind, w, u, v) - _base_derivative(kind, w, v, u)
            + gamma(gamma(w, v), u) - gamma(gamma(w, u), v))


def _shifted_base(v: TangentPair, eps: float) -> GroupElement:
    fixed = abs(v.u1.at_zero()) < 1e-14
    return GroupElement(CircleDiffeo(eps * v.u1, base_point_fixed=fixed), eps * v.u2)


def _fd_base_derivative(kind, w, u, v, eps: float) -> TangentPair:
    plus = christoffel_at(kind, _shifted_base(v, eps), w, u)
    minus = christoffel_at(kind, _shifted_base(v, -eps), w, u)
    return (plus - minus) / (2.0 * eps)


def curvature_tensor_fd(kind: EquationKind, u: TangentPair, v: TangentPair,
                        w: TangentPair, eps: float = FD_EPS,
                        richardson: bool = True) -> TangentPair:
    """R(u, v) w with D_1 Gamma from central differences of the conjugated map.

    With ``richardson`` the steps eps and eps/2 are combined to cancel the
    leading O(eps^2) error.
    """
    kind = EquationKind.parse(kind)
    check_chart(kind, u, v, w)

    def d1(a, b, c):
        coarse = _fd_base_derivative(kind, a, b, c, eps)
        if not richardson:
            return coarse
        fine = _fd_base_derivative(kind, a, b, c, eps / 2.0)
        return (4.0 * fine - coarse) / 3.0

    gamma = lambda a, b: christoffel_id(kind, a, b, check=False)
    return d1(w, u, v) - d1(w, v, u) + gamma(gamma(w, v), u) - gamma(gamma(w, u), v)


def gram_determinant(kind, conv, u, v) -> float:
    uu = metric(kind, conv, None, u, u)
    vv = metric(kind, conv, None, v, v)
    uv = metric(kind, conv, None, u, v)
    return uu * vv - uv * uv


def sectional_curvature(kind: EquationKind, conv: MetricConvention | None,
                        u: TangentPair, v: TangentPair,
                        strict: bool = False) -> CurvatureReport:
    """<R(u,v)v, u> and its Gram-normalized value.

    ``normalized`` is None for a degenerate span; with ``strict`` a
    :class:`DegenerateSpan` is raised instead.
    """
    kind = EquationKind.parse(kind)
    conv = conv or DEFAULT_CONVENTION
    r = curvature_tensor(kind, u, v, v)
    num = metric(kind, conv, None, r, u)
    uu = metric(kind, conv, None, u, u)
    vv = metric(kind, conv, None, v, v)
    gram = gram_determinant(kind, conv, u, v)
    if gram > GRAM_FLOOR * uu * vv and gram > 0:
        normalized = num / gram
    else:
        if strict:
            raise DegenerateSpan(f"gram determinant {gram:.3e} below floor")
        normalized = None
    return CurvatureReport(r, float(num), normalized, float(gram))


def sectional_curvature_2muhs_formula(u: TangentPair, v: TangentPair) -> float:
    """<G(u,v),G(u,v)> - <G(u,u),G(v,v)> - 3 mean(u1_x v1)^2 for 2muHS."""
    kind = EquationKind.TWO_MU_HS
    g = lambda a, b: christoffel_id(kind, a, b)
    ip = lambda a, b: metric(kind, DEFAULT_CONVENTION, None, a, b)
    guv = g(u, v)
    return ip(guv, guv) - ip(g(u, u), g(v, v)) - 3.0 * mean(derivative(u.u1) * v.u1) ** 2


class SecondComponentTerms(NamedTuple):
    """One-component curvature plus the four second-component corrections."""

    S1: float
    I1: float
    I2: float
    I3: float
    I4: float

    @property
    def total(self) -> float:
        return self.S1 + self.I1 + self.I2 + self.I3 + self.I4


def second_component_terms(u: TangentPair, v: TangentPair) -> SecondComponentTerms:
    """Split of the 2muHS unnormalized curvature into S1 + I1 + ... + I4.

    Each term is its own quadrature so the pieces can be checked separately.
    """
    u1, u2, v1, v2 = u.u1, u.u2, v.u1, v.u2
    g0 = lambda a, b: christoffel_id(EquationKind.MU_HS, TangentPair.first(a),
                                     TangentPair.first(b)).u1
    ainv = inv_mu_minus_dxx
    d = derivative
    s1 = sectional_curvature_2muhs_formula(TangentPair.first(u1), TangentPair.first(v1))
    uv2x = d(u2 * v2)
    i1 = 0.25 * mean(uv2x * ainv(uv2x))
    i2 = -0.25 * mean(d(u2 * u2) * ainv(d(v2 * v2)))
    i3 = (-mean(g0(u1, v1) * uv2x)
          + 0.5 * mean(g0(u1, u1) * d(v2 * v2))
          + 0.5 * mean(g0(v1, v1) * d(u2 * u2)))
    u1x, v1x = d(u1), d(v1)
    i4 = 0.25 * mean((u1x * v2 + v1x * u2) ** 2) - mean(u1x * u2 * v1x * v2)
    return SecondComponentTerms(float(s1), float(i1), float(i2), float(i3), float(i4))


def trig_pair_value(k1: float, l1: float) -> float:
    """Closed form (1 + k1^2 + l1^2 + k1^2 l1^2)/16 for cosine pairs."""
    return (1.0 + k1 ** 2 + l1 ** 2 + k1 ** 2 * l1 ** 2) / 16.0


def constant_curvature_residual(u: TangentPair, v: TangentPair, w: TangentPair,
                                conv: MetricConvention | None = None) -> float:
    """sup |R(u,v)w - (u<v,w> - v<u,w>)/4| for 2HS."""
    kind = EquationKind.TWO_HS
    conv = conv or DEFAULT_CONVENTION
    r = curvature_tensor(kind, u, v, w)
    expected = 0.25 * (u * metric(kind, conv, None, v, w) - v * metric(kind, conv, None, u, w))
    return (r - expected).sup_norm()


def random_band_limited(rng: np.random.Generator, n: int, max_freq: int = 6,
                        amplitude: float = 1.0, chart: bool = False,
                        with_mean: bool = False) -> PeriodicField:
    """Random trigonometric polynomial with modes 1..max_freq (times 2 pi).

    Coefficients decay like 1/k so derivatives stay O(amplitude * 2 pi).
    """
    if max_freq >= n // 2:
        raise ValueError("max_freq must be below n/2")
    k = np.arange(1, max_freq + 1)
    a = rng.standard_normal(max_freq) / k
    b = rng.standard_normal(max_freq) / k
    x = np.arange(n) / n
    vals = (a[:, None] * np.cos(2 * np.pi * k[:, None] * x)
            + b[:, None] * np.sin(2 * np.pi * k[:, None] * x)).sum(axis=0)
    if with_mean:
        vals = vals + rng.standard_normal()
    vals *= amplitude / max(np.max(np.abs(vals)), 1e-300)
    if chart:
        vals = vals - vals[0]
    return PeriodicField(vals)


def random_tangent(rng, kind: EquationKind, n: int, max_freq: int = 6,
                   amplitude: float = 1.0) -> TangentPair:
    kind = EquationKind.parse(kind)
    u1 = random_band_limited(rng, n, max_freq, amplitude, chart=kind.chart,
                             with_mean=kind.uses_mean)
    if kind.two_component:
        u2 = random_band_limited(rng, n, max_freq, amplitude, with_mean=True)
    else:
        u2 = PeriodicField.zeros(n)
    return TangentPair(u1, u2)
