"""Geodesic, Eulerian and Jacobi-field integrators.

Lagrangian stepping uses :func:`christoffel_lagrangian`, which is the
conjugated Christoffel map evaluated without inverting phi; it stays
resolved up to wave breaking, where phi_x -> 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from hs2.christoffel import (DEFAULT_CONVENTION, EquationKind, MetricConvention,
                             christoffel_lagrangian, metric)
from hs2.curvature import curvature_tensor
from hs2.errors import (BlowupReached, CFLViolation, ChartViolation, NormalizationError,
                        OrientationLost)
from hs2.field import (PeriodicField, derivative, inv_neg_dxx,
                       inverse_inertia, mean)
from hs2.group import (SLOPE_FLOOR, CircleDiffeo, GroupElement, TangentPair,
                       diffeo_invert)

DEFAULT_DT = 1e-3
ADAPT_SLOPE = 0.05
BLOWUP_SLOPE = 1e-3
BLOWUP_STOP_SLOPE = 1e-5
NORMALIZATION_TOL = 1e-8
CFL_NUMBER = 0.5


@dataclass(frozen=True, eq=False)
class GeodesicState:
    base: GroupElement
    velocity: TangentPair
    t: float
    kind: EquationKind

    @classmethod
    def start(cls, kind, u0: PeriodicField, rho0: PeriodicField | None = None) -> "GeodesicState":
        kind = EquationKind.parse(kind)
        if rho0 is None or not kind.two_component:
            rho0 = PeriodicField.zeros(u0.n)
        return cls(GroupElement.identity(u0.n), TangentPair(u0, rho0), 0.0, kind)

    @property
    def phi(self) -> CircleDiffeo:
        return self.base.phi

    def min_slope(self) -> float:
        return self.base.phi.min_slope()

    def eulerian(self) -> TangentPair:
        """(phi_t o phi^-1, f_t o phi^-1)."""
        return self.velocity.compose(diffeo_invert(self.base.phi))


@dataclass(frozen=True, eq=False)
class EulerianState:
    u: PeriodicField
    rho: PeriodicField
    t: float
    kind: EquationKind

    @classmethod
    def start(cls, kind, u0, rho0=None) -> "EulerianState":
        kind = EquationKind.parse(kind)
        if rho0 is None or not kind.two_component:
            rho0 = PeriodicField.zeros(u0.n)
        return cls(u0, rho0, 0.0, kind)


@dataclass(frozen=True, eq=False)
class JacobiState:
    xi: TangentPair
    dxi: TangentPair  # covariant derivative D xi / Dt
    geodesic: GeodesicState


# -- Lagrangian geodesics ------------------------------------------------

CHART_DRIFT_TOL = 1e-12


def _project_chart(kind: EquationKind, field: PeriodicField) -> PeriodicField:
    # the flow preserves u1(0) = 0, so this only removes rounding
    if not kind.chart:
        return field
    drift = field.at_zero()
    if abs(drift) > CHART_DRIFT_TOL * (1.0 + field.sup_norm()):
        raise ChartViolation(f"chart drift {drift:.3e} in one step")
    return field - drift


def _make_base(kind, disp: PeriodicField, f: PeriodicField) -> GroupElement:
    return GroupElement(CircleDiffeo(disp, base_point_fixed=kind.chart, check=False), f)


def _rk4(y, rhs, dt):
    k1 = rhs(y)
    k2 = rhs([a + 0.5 * dt * b for a, b in zip(y, k1)])
    k3 = rhs([a + 0.5 * dt * b for a, b in zip(y, k2)])
    k4 = rhs([a + dt * b for a, b in zip(y, k3)])
    return [a + (dt / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
            for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)]


def _geodesic_rhs(kind):
    def rhs(y):
        disp, f, v1, v2 = y
        base = _make_base(kind, disp, f)
        vel = TangentPair(v1, v2)
        acc = christoffel_lagrangian(kind, base, vel, vel)
        return [v1, v2, acc.u1, acc.u2]
    return rhs


def geodesic_step(s: GeodesicState, dt: float) -> GeodesicState:
    """One RK4 step of (phi_tt, f_tt) = Gamma_(phi,f)((phi_t, f_t), (phi_t, f_t))."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    m = s.min_slope()
    if not m > SLOPE_FLOOR:
        raise OrientationLost(f"min slope {m:.3e} at t={s.t:.6g}")
    kind = s.kind
    y = [s.base.phi.displacement, s.base.f, s.velocity.u1, s.velocity.u2]
    disp, f, v1, v2 = _rk4(y, _geodesic_rhs(kind), dt)
    disp, v1 = _project_chart(kind, disp), _project_chart(kind, v1)
    base = _make_base(kind, disp, f)
    m = base.phi.min_slope()
    if not m > SLOPE_FLOOR:
        raise OrientationLost(f"geodesic left the chart near t={s.t + dt:.6g} "
                              f"(min slope {m:.3e})")
    return GeodesicState(base, TangentPair(v1, v2), s.t + dt, kind)


def adaptive_dt(dt: float, min_slope: float) -> float:
    """Halve dt for every factor 4 that min phi_x falls below ADAPT_SLOPE."""
    if min_slope >= ADAPT_SLOPE:
        return dt
    levels = math.ceil(math.log(ADAPT_SLOPE / max(min_slope, 1e-300)) / math.log(4.0))
    return dt / 2.0 ** levels


def integrate_geodesic(s: GeodesicState, t_end: float, dt: float = DEFAULT_DT,
                       adaptive: bool = True,
                       callback: Callable[[GeodesicState], None] | None = None) -> GeodesicState:
    """Step from s.t to t_end (the last step is shortened to land exactly)."""
    while s.t < t_end - 1e-14:
        h = adaptive_dt(dt, s.min_slope()) if adaptive else dt
        s = geodesic_step(s, min(h, t_end - s.t))
        if callback is not None:
            callback(s)
    return s


def geodesic_energy(g: GeodesicState, conv: MetricConvention | None = None) -> float:
    return metric(g.kind, conv or DEFAULT_CONVENTION, g.base, g.velocity, g.velocity)


class BlowupResult(NamedTuple):
    detected: bool
    time: float | None  # extrapolated time at which min phi_x reaches 0
    threshold_time: float | None  # first step with min phi_x < threshold
    state: GeodesicState


def detect_blowup(s: GeodesicState, t_max: float, dt: float = DEFAULT_DT,
                  threshold: float = BLOWUP_SLOPE,
                  stop_slope: float = BLOWUP_STOP_SLOPE) -> BlowupResult:
    """Integrate until phi_x touches zero and estimate the touching time.

    Near breaking min phi_x behaves like c (T - t)^2, so sqrt(min phi_x) is
    extrapolated linearly to zero from the last two steps once it falls below
    ``stop_slope`` (well under the detection ``threshold``).
    """
    history = [(s.t, s.min_slope())]
    t_cross = None
    while s.t < t_max - 1e-14:
        h = min(adaptive_dt(dt, history[-1][1]), t_max - s.t)
        try:
            s = geodesic_step(s, h)
        except OrientationLost:
            break
        m = s.min_slope()
        history.append((s.t, m))
        if t_cross is None and m < threshold:
            t_cross = s.t
        if t_cross is not None and (m < stop_slope or m > history[-2][1]):
            break
    if t_cross is None:
        return BlowupResult(False, None, None, s)
    (ta, ma), (tb, mb) = history[-2], history[-1]
    if mb > ma:
        # passed a near-touch without reaching zero: report the vertex
        (t0, m0), (t1, m1), (t2, m2) = history[-3:]
        coef = np.polyfit([t0, t1, t2], [m0, m1, m2], 2)
        return BlowupResult(True, float(-coef[1] / (2 * coef[0])), t_cross, s)
    sa, sb = math.sqrt(ma), math.sqrt(mb)
    t_est = tb + sb * (tb - ta) / (sa - sb)
    return BlowupResult(True, float(t_est), t_cross, s)


# -- explicit HS geodesic --------------------------------------------------

def hs_unit_energy(u0: PeriodicField) -> float:
    """(1/4) * integral of u0_x^2, the classical HS normalization."""
    return 0.25 * mean(derivative(u0) ** 2)


def _check_normalized(u0: PeriodicField) -> None:
    e = hs_unit_energy(u0)
    if abs(e - 1.0) > NORMALIZATION_TOL:
        raise NormalizationError(f"(1/4) int u0_x^2 = {e:.12g}, expected 1")


def normalize_hs(u0: PeriodicField) -> PeriodicField:
    """Rescale (and pin u0(0) = 0) so that (1/4) int u0_x^2 = 1."""
    u0 = u0 - u0.at_zero()
    return u0 * (1.0 / math.sqrt(hs_unit_energy(u0)))


def min_slope_continuous(f: PeriodicField, oversample: int = 16) -> float:
    """Minimum of the interpolant of f, refined off the grid by Newton."""
    n = f.n * oversample
    pts = np.arange(n) / n
    vals = f.evaluate(pts)
    y = np.array([pts[int(np.argmin(vals))]])
    for _ in range(20):
        d1 = f.evaluate(y, order=1)
        d2 = f.evaluate(y, order=2)
        if d2[0] <= 0:
            break
        step = d1 / d2
        y = y - step
        if abs(step[0]) < 1e-15:
            break
    return float(min(np.min(vals), f.evaluate(y)[0]))


def hs_blowup_time(u0: PeriodicField) -> float:
    """T*(u0) = pi/2 + arctan(min(u0_x) / 2) for normalized u0."""
    _check_normalized(u0)
    return math.pi / 2.0 + math.atan(0.5 * min_slope_continuous(derivative(u0)))


def _hs_profile_term(u0: PeriodicField) -> PeriodicField:
    return inv_neg_dxx(derivative(derivative(u0) ** 2))


def explicit_hs_geodesic(u0: PeriodicField, t: float) -> CircleDiffeo:
    """Closed-form HS geodesic from the identity with phi_t(0) = u0."""
    _check_normalized(u0)
    if abs(u0.at_zero()) > 1e-12 * (1.0 + u0.sup_norm()):
        raise NormalizationError("u0 must vanish at x = 0")
    t_star = hs_blowup_time(u0)
    if not 0.0 <= t < t_star:
        raise BlowupReached(f"t={t} outside [0, T*={t_star:.12g})")
    disp = (-0.125 * (1.0 - math.cos(2 * t))) * _hs_profile_term(u0) + (0.5 * math.sin(2 * t)) * u0
    return CircleDiffeo(disp, base_point_fixed=True, check=False)


def explicit_hs_velocity(u0: PeriodicField, t: float) -> PeriodicField:
    return (-0.25 * math.sin(2 * t)) * _hs_profile_term(u0) + math.cos(2 * t) * u0


def explicit_hs_slope(u0: PeriodicField, t: float) -> PeriodicField:
    """(cos t + u0_x sin t / 2)^2."""
    return (math.cos(t) + (0.5 * math.sin(t)) * derivative(u0)) ** 2


# -- Eulerian solver -------------------------------------------------------

def eulerian_rhs(kind: EquationKind, u: PeriodicField, rho: PeriodicField):
    """(u_t, rho_t) for the Cauchy problem in Eulerian variables."""
    kind = EquationKind.parse(kind)
    ux = derivative(u)
    src = 0.5 * ux * ux
    if kind.two_component:
        src = src + 0.5 * rho * rho
    if kind.uses_mean:
        src = src + 2.0 * mean(u) * u
    # the argument is an exact derivative; inv_neg_dxx raises NonZeroMean
    # if the discretization ever breaks that
    u_t = -(u * ux) - inverse_inertia(kind.inertia, derivative(src))
    if kind.two_component:
        rho_t = -(u * derivative(rho)) - rho * ux
    else:
        rho_t = PeriodicField.zeros(u.n)
    return u_t, rho_t


def cfl_limit(u: PeriodicField) -> float:
    umax = u.sup_norm()
    return math.inf if umax == 0 else CFL_NUMBER / (u.n * umax)


def eulerian_step(s: EulerianState, dt: float) -> EulerianState:
    if not dt > 0:
        raise ValueError("dt must be positive")
    limit = cfl_limit(s.u)
    if dt > limit:
        raise CFLViolation(f"dt={dt:.3e} exceeds advective limit {limit:.3e}")
    kind = s.kind

    def rhs(y):
        return list(eulerian_rhs(kind, y[0], y[1]))

    u, rho = _rk4([s.u, s.rho], rhs, dt)
    return EulerianState(_project_chart(kind, u), rho, s.t + dt, kind)


def integrate_eulerian(s: EulerianState, t_end: float, dt: float = DEFAULT_DT,
                       callback=None) -> EulerianState:
    while s.t < t_end - 1e-14:
        s = eulerian_step(s, min(dt, t_end - s.t))
        if callback is not None:
            callback(s)
    return s


def lagrangian_eulerian_check(g: GeodesicState, initial: TangentPair,
                              dt: float = DEFAULT_DT) -> float:
    """sup-norm gap between (phi_t, f_t) o phi^-1 and the Eulerian solution.

    The Eulerian solver is restarted from ``initial`` and run to g.t.
    """
    e = integrate_eulerian(EulerianState.start(g.kind, initial.u1, initial.u2), g.t, dt)
    lag = g.eulerian()
    gap = (lag.u1 - e.u).sup_norm()
    if g.kind.two_component:
        gap = max(gap, (lag.u2 - e.rho).sup_norm())
    return gap


# -- Jacobi fields ---------------------------------------------------------

def curvature_at(kind, base: GroupElement, u: TangentPair, v: TangentPair,
                 w: TangentPair) -> TangentPair:
    """R_(phi,f)(u, v) w by right-invariant transport to the identity."""
    phi = base.phi
    if phi.is_identity:
        return curvature_tensor(kind, u, v, w)
    inv = diffeo_invert(phi)
    r = curvature_tensor(kind, u.compose(inv), v.compose(inv), w.compose(inv))
    return r.compose(phi)


def _jacobi_rhs(kind):
    def rhs(y):
        disp, f, v1, v2, x1, x2, e1, e2 = y
        base = _make_base(kind, disp, f)
        vel, xi, eta = TangentPair(v1, v2), TangentPair(x1, x2), TangentPair(e1, e2)
        acc = christoffel_lagrangian(kind, base, vel, vel)
        dxi = eta + christoffel_lagrangian(kind, base, xi, vel)
        deta = christoffel_lagrangian(kind, base, eta, vel) - curvature_at(kind, base, xi, vel, vel)
        return [v1, v2, acc.u1, acc.u2, dxi.u1, dxi.u2, deta.u1, deta.u2]
    return rhs


def jacobi_step(j: JacobiState, dt: float) -> JacobiState:
    """RK4 step of D^2 xi/Dt^2 = -R(xi, v) v together with the geodesic.

    The covariant derivative along the curve is D xi/Dt = xi_t - Gamma(xi, v).
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    g = j.geodesic
    kind = g.kind
    y = [g.base.phi.displacement, g.base.f, g.velocity.u1, g.velocity.u2,
         j.xi.u1, j.xi.u2, j.dxi.u1, j.dxi.u2]
    disp, f, v1, v2, x1, x2, e1, e2 = _rk4(y, _jacobi_rhs(kind), dt)
    disp, v1 = _project_chart(kind, disp), _project_chart(kind, v1)
    x1, e1 = _project_chart(kind, x1), _project_chart(kind, e1)
    base = _make_base(kind, disp, f)
    m = base.phi.min_slope()
    if not m > SLOPE_FLOOR:
        raise OrientationLost(f"geodesic left the chart near t={g.t + dt:.6g}")
    geo = GeodesicState(base, TangentPair(v1, v2), g.t + dt, kind)
    return JacobiState(TangentPair(x1, x2), TangentPair(e1, e2), geo)


def jacobi_norm(j: JacobiState, conv: MetricConvention | None = None) -> float:
    g = j.geodesic
    return math.sqrt(max(metric(g.kind, conv or DEFAULT_CONVENTION, g.base, j.xi, j.xi), 0.0))


def integrate_jacobi(j: JacobiState, t_end: float, dt: float,
                     conv: MetricConvention | None = None):
    """Return (times, norms, final state) sampled after every step."""
    times, norms = [j.geodesic.t], [jacobi_norm(j, conv)]
    while j.geodesic.t < t_end - 1e-14:
        j = jacobi_step(j, min(dt, t_end - j.geodesic.t))
        times.append(j.geodesic.t)
        norms.append(jacobi_norm(j, conv))
    return np.array(times), np.array(norms), j


# -- non-uniqueness family -------------------------------------------------

def hs_eulerian_series(u0: PeriodicField, t_end: float, dt: float = DEFAULT_DT):
    """Eulerian HS solution sampled every step: (times, fields)."""
    s = EulerianState.start(EquationKind.HS, u0)
    times, fields = [0.0], [u0]

    def keep(st):
        times.append(st.t)
        fields.append(st.u)

    integrate_eulerian(s, t_end, dt, callback=keep)
    return np.array(times), fields


def hs_residual(u: PeriodicField, u_t: PeriodicField) -> PeriodicField:
    """u_t + u u_x + (1/2) A^{-1}(u_x^2)_x with the spatial mean removed.

    Removing the mean makes the residual blind to the rotation constant that
    the quotient by rigid rotations factors out.
    """
    ux = derivative(u)
    r = u_t + u * ux + 0.5 * inv_neg_dxx(derivative(ux * ux))
    return r - mean(r)


def shifted_solution_check(times: Sequence[float], solution: Sequence[PeriodicField],
                           c: Callable[[float], float],
                           dc: Callable[[float], float]) -> float:
    """sup residual of t -> u(t, x - c(t)) + c'(t) over the interior times.

    Time derivatives use the fourth-order central stencil, so ``times`` must
    be uniformly spaced.
    """
    times = np.asarray(times, dtype=float)
    if len(times) < 5:
        raise ValueError("need at least five time samples")
    h = times[1] - times[0]
    if not np.allclose(np.diff(times), h, rtol=1e-9, atol=1e-12):
        raise ValueError("times must be uniformly spaced")
    shifted = [u.shift(c(t)) + dc(t) for t, u in zip(times, solution)]
    worst = 0.0
    for i in range(2, len(times) - 2):
        u_t = (shifted[i - 2] - 8.0 * shifted[i - 1] + 8.0 * shifted[i + 1]
               - shifted[i + 2]) * (1.0 / (12.0 * h))
        worst = max(worst, hs_residual(shifted[i], u_t).sup_norm())
    return worst
