import math

import numpy as np
import pytest

from hs2.christoffel import (DEFAULT_CONVENTION, EquationKind, MetricConvention,
                             christoffel_lagrangian, metric, norm)
from hs2.dynamics import (EulerianState, GeodesicState, JacobiState, adaptive_dt,
                          detect_blowup, eulerian_rhs, eulerian_step, explicit_hs_geodesic,
                          explicit_hs_slope, explicit_hs_velocity, geodesic_energy,
                          geodesic_step, hs_blowup_time, hs_eulerian_series, hs_residual,
                          integrate_eulerian, integrate_geodesic, integrate_jacobi,
                          jacobi_norm, lagrangian_eulerian_check, normalize_hs,
                          shifted_solution_check)
from hs2.errors import BlowupReached, CFLViolation, NonZeroMean, NormalizationError
from hs2.field import PeriodicField, antiderivative, grid
from hs2.group import GroupElement, TangentPair
from hs2.verification import smooth_data

TWO_PI = 2 * np.pi


def reference_u0(n=256):
    return PeriodicField(np.sqrt(2) / np.pi * np.sin(TWO_PI * grid(n)))


# -- explicit HS geodesic ----------------------------------------------------

def test_reference_blowup_time():
    assert hs_blowup_time(reference_u0()) == pytest.approx(math.pi / 2 - math.atan(math.sqrt(2)), abs=1e-14)
    assert hs_blowup_time(reference_u0()) == pytest.approx(0.61548, abs=1e-5)


def test_blowup_time_approaches_half_pi():
    # u0_x = exp(k cos 2 pi x) - I0(k): after normalization min u0_x -> 0^- as k grows
    x = grid(1024)
    times = []
    for kappa in (2.0, 8.0, 32.0):
        slope = np.exp(kappa * np.cos(TWO_PI * x))
        u0 = normalize_hs(antiderivative(PeriodicField(slope - slope.mean())))
        times.append(hs_blowup_time(u0))
    assert all(t < math.pi / 2 for t in times)
    assert times[0] < times[1] < times[2]


def test_explicit_geodesic_at_zero_is_identity():
    assert explicit_hs_geodesic(reference_u0(), 0.0).displacement.sup_norm() < 1e-16


def test_slope_identity():
    u0 = reference_u0()
    t_star = hs_blowup_time(u0)
    for t in np.linspace(0, 0.99 * t_star, 9):
        phi = explicit_hs_geodesic(u0, t)
        assert (phi.slope() - explicit_hs_slope(u0, t)).sup_norm() < 1e-10


def test_plug_in_residual():
    # second-order central difference in t against the geodesic equation
    u0, t, h = reference_u0(), 0.3, 1e-4
    d = lambda s: explicit_hs_geodesic(u0, s).displacement
    acc = (d(t + h) - 2 * d(t) + d(t - h)) * (1 / h ** 2)
    base = GroupElement(explicit_hs_geodesic(u0, t), PeriodicField.zeros(256))
    vel = TangentPair.first(explicit_hs_velocity(u0, t))
    assert (acc - christoffel_lagrangian(EquationKind.HS, base, vel, vel).u1).sup_norm() < 1e-8


def test_explicit_geodesic_errors():
    u0 = reference_u0()
    with pytest.raises(NormalizationError):
        explicit_hs_geodesic(u0 * 1.01, 0.1)
    with pytest.raises(NormalizationError):
        hs_blowup_time(u0 * 0.5)
    with pytest.raises(BlowupReached):
        explicit_hs_geodesic(u0, 0.62)
    with pytest.raises(NormalizationError):
        explicit_hs_geodesic(normalize_hs(PeriodicField(np.cos(TWO_PI * grid(256)))) + 0.1, 0.1)


# -- Lagrangian integrator ---------------------------------------------------

def test_zero_velocity_is_stationary():
    g = GeodesicState.start(EquationKind.TWO_MU_HS, PeriodicField.zeros(64), PeriodicField.zeros(64))
    g2 = geodesic_step(g, 0.1)
    assert g2.t == pytest.approx(0.1)
    assert g2.base.phi.displacement.sup_norm() == 0 and g2.velocity.sup_norm() == 0
    assert geodesic_energy(g2) == 0


def test_constant_velocity_is_rigid_rotation():
    c = 0.7
    g = GeodesicState.start(EquationKind.MU_HS, PeriodicField.constant(c, 64))
    g = integrate_geodesic(g, 0.5, 0.01)
    assert g.base.phi.displacement.allclose(c * 0.5, 1e-13)
    assert g.base.f.sup_norm() == 0


def test_matches_explicit_geodesic():
    u0 = reference_u0()
    t_star = hs_blowup_time(u0)
    worst = []
    integrate_geodesic(GeodesicState.start(EquationKind.HS, u0), 0.9 * t_star, 1e-3,
                       adaptive=False,
                       callback=lambda s: worst.append(explicit_hs_geodesic(u0, s.t).distance(s.phi)))
    assert max(worst) < 1e-6


def test_rk4_order():
    u0 = reference_u0(128)
    start = GeodesicState.start(EquationKind.HS, u0)
    errs = [explicit_hs_geodesic(u0, 0.5).distance(
        integrate_geodesic(start, 0.5, dt, adaptive=False).phi) for dt in (0.02, 0.01)]
    assert 12 <= errs[0] / errs[1] <= 20


def test_adaptive_dt():
    assert adaptive_dt(1e-3, 0.5) == 1e-3
    assert adaptive_dt(1e-3, 0.04) == 5e-4
    assert adaptive_dt(1e-3, 0.04 / 4) == 2.5e-4


def test_blowup_detection():
    u0 = reference_u0(128)
    res = detect_blowup(GeodesicState.start(EquationKind.HS, u0), 1.0)
    assert res.detected
    assert abs(res.time - hs_blowup_time(u0)) < 1e-3
    assert res.threshold_time < res.time


def test_no_blowup_for_positive_density():
    kind = EquationKind.TWO_HS
    u, rho = smooth_data(kind, 64)
    res = detect_blowup(GeodesicState.start(kind, u, rho), 0.3, 0.01)
    assert not res.detected and res.state.t == pytest.approx(0.3)


@pytest.mark.parametrize("kind", list(EquationKind))
def test_energy_conservation(kind):
    u, rho = smooth_data(kind, 128)
    g = GeodesicState.start(kind, u, rho)
    e0 = geodesic_energy(g)
    g = integrate_geodesic(g, 0.5, 1e-3)
    assert abs(geodesic_energy(g) - e0) / e0 / 0.5 < 1e-8


def test_hs_energy_in_classical_convention():
    u0 = reference_u0(128)
    g = GeodesicState.start(EquationKind.TWO_HS, u0, PeriodicField.zeros(128))
    quarter = MetricConvention(0.25)
    assert geodesic_energy(g, quarter) == pytest.approx(1.0, rel=1e-12)
    g = integrate_geodesic(g, 0.5, 1e-3)
    assert geodesic_energy(g, quarter) == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize("two, one", [(EquationKind.TWO_HS, EquationKind.HS),
                                      (EquationKind.TWO_MU_HS, EquationKind.MU_HS)])
def test_zero_density_reduces(two, one):
    u, _ = smooth_data(one, 64)
    zero = PeriodicField.zeros(64)
    a = integrate_geodesic(GeodesicState.start(two, u, zero), 0.2, 0.01)
    b = integrate_geodesic(GeodesicState.start(one, u), 0.2, 0.01)
    assert a.base.phi.distance(b.base.phi) < 1e-10
    assert (a.velocity - b.velocity).sup_norm() < 1e-10
    ea = integrate_eulerian(EulerianState.start(two, u, zero), 0.2, 0.01)
    eb = integrate_eulerian(EulerianState.start(one, u), 0.2, 0.01)
    assert (ea.u - eb.u).sup_norm() < 1e-10


# -- Eulerian solver ---------------------------------------------------------

def test_constant_state_is_stationary():
    s = EulerianState.start(EquationKind.TWO_MU_HS, PeriodicField.constant(0.8, 64),
                            PeriodicField.zeros(64))
    s = integrate_eulerian(s, 0.1, 0.005)
    assert s.u.allclose(0.8, 1e-12)


def test_two_hs_initial_tendency(x256):
    u_t, rho_t = eulerian_rhs(EquationKind.TWO_HS, PeriodicField.zeros(256),
                              PeriodicField(np.sin(TWO_PI * x256)))
    assert u_t.allclose(-np.sin(4 * np.pi * x256) / (16 * np.pi), 1e-15)
    assert rho_t.sup_norm() == 0


def test_cfl_violation():
    s = EulerianState.start(EquationKind.HS, PeriodicField(np.sin(TWO_PI * grid(64))))
    with pytest.raises(CFLViolation):
        eulerian_step(s, 0.1)


def test_nonzero_mean_signals_corruption(monkeypatch):
    import hs2.dynamics as dyn
    monkeypatch.setattr(dyn, "derivative", lambda f: f)  # breaks the exact-derivative form
    with pytest.raises(NonZeroMean):
        eulerian_rhs(EquationKind.TWO_HS, PeriodicField.zeros(64), PeriodicField.constant(1.0, 64))


def test_lagrangian_eulerian_agreement():
    kind = EquationKind.TWO_MU_HS
    u, rho = smooth_data(kind, 256)
    g = GeodesicState.start(kind, u, rho)
    assert lagrangian_eulerian_check(g, TangentPair(u, rho)) == 0.0
    g = integrate_geodesic(g, 0.3, 1e-3)
    assert lagrangian_eulerian_check(g, TangentPair(u, rho), 1e-3) < 1e-4


def test_gap_near_breaking_is_reported():
    kind = EquationKind.TWO_HS
    u0 = reference_u0(128)
    zero = PeriodicField.zeros(128)
    g = integrate_geodesic(GeodesicState.start(kind, u0, zero), 0.95 * hs_blowup_time(u0), 1e-3)
    gap = lagrangian_eulerian_check(g, TangentPair(u0, zero), 1e-4)
    assert np.isfinite(gap)  # diagnostic only: no bound is asserted here


# -- Jacobi fields -----------------------------------------------------------

def unit_speed_two_hs(n=128):
    kind = EquationKind.TWO_HS
    x = grid(n)
    v = TangentPair(PeriodicField(0.05 * np.sin(TWO_PI * x)),
                    PeriodicField(1.0 + 0.1 * np.cos(TWO_PI * x)))
    v = v / norm(kind, None, None, v)
    eta = TangentPair(PeriodicField(0.1 * np.sin(4 * np.pi * x)),
                      PeriodicField(0.2 * np.cos(TWO_PI * x)))
    return kind, v, eta - v * metric(kind, DEFAULT_CONVENTION, None, eta, v)


def test_normal_jacobi_field_oscillates():
    kind, v, eta = unit_speed_two_hs()
    j = JacobiState(TangentPair.zeros(128), eta, GeodesicState.start(kind, v.u1, v.u2))
    times, norms, _ = integrate_jacobi(j, 2.5, 0.01)
    keep = times >= 0.1
    ratio = norms[keep] / np.sin(times[keep] / 2)
    assert (ratio.max() - ratio.min()) / ratio.mean() < 0.01
    assert ratio.mean() == pytest.approx(2 * norm(kind, None, None, eta), rel=1e-6)
    assert norms.max() <= 2.05 * 2 * norm(kind, None, None, eta)


def test_tangential_jacobi_field():
    kind, v, _ = unit_speed_two_hs(64)
    j = JacobiState(v, TangentPair.zeros(64), GeodesicState.start(kind, v.u1, v.u2))
    _, _, end = integrate_jacobi(j, 0.5, 0.01)
    assert (end.xi - end.geodesic.velocity).sup_norm() < 1e-6
    assert jacobi_norm(end) == pytest.approx(1.0, rel=1e-8)


# -- non-uniqueness family ---------------------------------------------------

def test_shifted_family():
    u0, _ = smooth_data(EquationKind.HS, 128)
    times, sol = hs_eulerian_series(u0, 0.3, 1e-3)
    base = shifted_solution_check(times, sol, lambda t: 0.0, lambda t: 0.0)
    assert base < 1e-8
    for c, dc in [(lambda t: 0.5 * t * t, lambda t: t),
                  (lambda t: math.sin(t) - t, lambda t: math.cos(t) - 1.0)]:
        assert shifted_solution_check(times, sol, c, dc) < 1e-5


def test_shifted_family_detects_wrong_velocity():
    u0, _ = smooth_data(EquationKind.HS, 64)
    times, sol = hs_eulerian_series(u0, 0.05, 1e-3)
    # c(t) = t^2 / 2 but with the wrong time derivative added
    assert shifted_solution_check(times, sol, lambda t: 0.5 * t * t, lambda t: 2 * t) > 1e-3


def test_shifted_check_needs_uniform_samples():
    u0, _ = smooth_data(EquationKind.HS, 64)
    with pytest.raises(ValueError):
        shifted_solution_check([0, 1, 2], [u0] * 3, lambda t: 0, lambda t: 0)
    with pytest.raises(ValueError):
        shifted_solution_check([0, 1, 2, 3, 5], [u0] * 5, lambda t: 0, lambda t: 0)


def test_hs_residual_of_steady_zero():
    assert hs_residual(PeriodicField.zeros(64), PeriodicField.zeros(64)).sup_norm() == 0
