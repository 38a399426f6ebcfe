import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hs2.christoffel import DEFAULT_CONVENTION, EquationKind, MetricConvention, metric
from hs2.curvature import (GRAM_FLOOR, constant_curvature_residual, curvature_tensor,
                           curvature_tensor_fd, gram_determinant, random_band_limited,
                           random_tangent, second_component_terms, sectional_curvature,
                           sectional_curvature_2muhs_formula, trig_pair_value)
from hs2.errors import ChartViolation, DegenerateSpan
from hs2.field import mean
from hs2.group import TangentPair

from conftest import trig

N = 256
KINDS = list(EquationKind)
TWO_PI = 2 * np.pi


def triple(kind, seed, amp=1.0, n=N):
    rng = np.random.default_rng(seed)
    return tuple(random_tangent(rng, kind, n, 6, amp) for _ in range(3))


def cos_pair(k1, k2, l1, l2, n=N):
    return (TangentPair(trig("cos", k1, n), trig("cos", k2, n)),
            TangentPair(trig("cos", l1, n), trig("cos", l2, n)))


@pytest.mark.parametrize("kind", KINDS)
def test_antisymmetry(kind):
    u, v, w = triple(kind, 1)
    assert curvature_tensor(kind, u, u, w).sup_norm() < 1e-12 * (1 + w.sup_norm())
    r = curvature_tensor(kind, u, v, w)
    assert (r + curvature_tensor(kind, v, u, w)).sup_norm() <= 1e-12 * r.sup_norm()


def test_chart_is_required():
    u = TangentPair.first(trig("cos", 1))
    with pytest.raises(ChartViolation):
        curvature_tensor(EquationKind.HS, u, u, u)


@pytest.mark.parametrize("seed", range(5))
def test_two_hs_tensor_closed_form(seed):
    u, v, w = triple(EquationKind.TWO_HS, seed)
    assert constant_curvature_residual(u, v, w) < 1e-8


@pytest.mark.parametrize("kind", KINDS)
def test_fd_oracle_route_equivalence(kind):
    # 50 random triples per kind
    rng = np.random.default_rng(KINDS.index(kind))
    worst = 0.0
    for _ in range(50):
        u, v, w = (random_tangent(rng, kind, N, 6) for _ in range(3))
        diff = curvature_tensor(kind, u, v, w) - curvature_tensor_fd(kind, u, v, w)
        worst = max(worst, diff.sup_norm())
    assert worst < 5e-6


def test_fd_oracle_antisymmetric_and_constant_curvature():
    kind = EquationKind.TWO_HS
    u, v, w = triple(kind, 7)
    a = curvature_tensor_fd(kind, u, v, w)
    b = curvature_tensor_fd(kind, v, u, w)
    assert (a + b).sup_norm() < 5e-6
    ip = lambda p, q: metric(kind, DEFAULT_CONVENTION, None, p, q)
    expected = 0.25 * (u * ip(v, w) - v * ip(u, w))
    assert (a - expected).sup_norm() < 5e-6


def test_fd_without_richardson_is_coarser():
    kind = EquationKind.TWO_MU_HS
    u, v, w = triple(kind, 8)
    exact = curvature_tensor(kind, u, v, w)
    plain = (curvature_tensor_fd(kind, u, v, w, richardson=False) - exact).sup_norm()
    extrapolated = (curvature_tensor_fd(kind, u, v, w) - exact).sup_norm()
    assert extrapolated < plain


@pytest.mark.parametrize("seed", range(10))
def test_two_hs_sectional_is_quarter(seed):
    u, v, _ = triple(EquationKind.TWO_HS, seed)
    rep = sectional_curvature(EquationKind.TWO_HS, None, u, v)
    assert rep.normalized == pytest.approx(0.25, abs=1e-6)
    assert rep.gram_det > 0


def test_hs_convention_gives_unit_curvature():
    kind = EquationKind.HS
    u, v, _ = triple(kind, 3)
    rep = sectional_curvature(kind, MetricConvention(0.25), u, v)
    assert rep.normalized == pytest.approx(1.0, abs=1e-6)


def test_second_component_directions():
    kind = EquationKind.TWO_MU_HS
    for k2, l2 in itertools.permutations((1, 2, 3), 2):
        u, v = TangentPair.second(trig("cos", k2)), TangentPair.second(trig("cos", l2))
        rep = sectional_curvature(kind, None, u, v)
        assert rep.unnormalized == pytest.approx(1 / 16, rel=1e-10)
        assert rep.normalized == pytest.approx(0.25, rel=1e-10)


@pytest.mark.parametrize("k1,l1", list(itertools.permutations((1, 2, 3), 2)))
@pytest.mark.parametrize("k2,l2", [(1, 2), (2, 1), (1, 3), (3, 4), (2, 4)])
def test_two_muhs_trig_values(k1, l1, k2, l2):
    u, v = cos_pair(k1, k2, l1, l2)
    want = trig_pair_value(TWO_PI * k1, TWO_PI * l1)
    got = sectional_curvature(EquationKind.TWO_MU_HS, None, u, v).unnormalized
    assert got == pytest.approx(want, rel=1e-8)
    assert sectional_curvature_2muhs_formula(u, v) == pytest.approx(want, rel=1e-8)


def test_cli_style_pair_value():
    u, v = cos_pair(1, 2, 2, 1)
    want = (1 + 4 * np.pi ** 2 + 16 * np.pi ** 2 + 64 * np.pi ** 4) / 16
    assert sectional_curvature(EquationKind.TWO_MU_HS, None, u, v).unnormalized == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("k1,l1", list(itertools.permutations((1, 2, 3), 2)))
def test_muhs_reduction(k1, l1):
    u = TangentPair.first(trig("cos", k1))
    v = TangentPair.first(trig("cos", l1))
    got = sectional_curvature(EquationKind.MU_HS, None, u, v).unnormalized
    assert got == pytest.approx((TWO_PI * k1) ** 2 * (TWO_PI * l1) ** 2 / 16, rel=1e-8)


@pytest.mark.parametrize("k1,l1,k2,l2", [(1, 2, 1, 3), (2, 1, 3, 1), (1, 3, 2, 4), (3, 2, 1, 2)])
def test_second_component_terms(k1, l1, k2, l2):
    u, v = cos_pair(k1, k2, l1, l2)
    terms = second_component_terms(u, v)
    u2v2 = mean(u.u2 * u.u2 * v.u2 * v.u2)
    assert terms.I1 == pytest.approx(0.25 * u2v2, rel=1e-12)
    assert terms.I2 == pytest.approx(-0.25 * u2v2 + 1 / 16, abs=1e-14)
    assert terms.I3 + terms.I4 == pytest.approx(((TWO_PI * k1) ** 2 + (TWO_PI * l1) ** 2) / 16, rel=1e-12)
    assert terms.S1 == pytest.approx((TWO_PI * k1) ** 2 * (TWO_PI * l1) ** 2 / 16, rel=1e-12)
    total = sectional_curvature(EquationKind.TWO_MU_HS, None, u, v).unnormalized
    assert terms.total == pytest.approx(total, rel=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_two_muhs_route_equivalence(seed):
    u, v, _ = triple(EquationKind.TWO_MU_HS, seed)
    tensor = sectional_curvature(EquationKind.TWO_MU_HS, None, u, v).unnormalized
    assert abs(tensor - sectional_curvature_2muhs_formula(u, v)) < 1e-8


def test_formula_on_equal_directions_vanishes():
    u, _, _ = triple(EquationKind.TWO_MU_HS, 4)
    assert abs(sectional_curvature_2muhs_formula(u, u)) < 1e-9


def test_degenerate_span():
    u, _, _ = triple(EquationKind.TWO_HS, 5)
    rep = sectional_curvature(EquationKind.TWO_HS, None, u, u * 2.0)
    assert rep.normalized is None and abs(rep.gram_det) <= GRAM_FLOOR
    assert "normalized" not in rep.as_dict()
    with pytest.raises(DegenerateSpan):
        sectional_curvature(EquationKind.TWO_HS, None, u, u, strict=True)


@pytest.mark.parametrize("kind", KINDS)
@given(seed=st.integers(0, 10_000), a=st.floats(0.1, 5), b=st.floats(-5, -0.1))
def test_scaling(kind, seed, a, b):
    u, v, _ = triple(kind, seed, amp=0.5)
    base = sectional_curvature(kind, None, u, v)
    scaled = sectional_curvature(kind, None, u * a, v * b)
    assert scaled.unnormalized == pytest.approx(a * a * b * b * base.unnormalized, rel=1e-10)
    assert scaled.normalized == pytest.approx(base.normalized, rel=1e-9)
    assert gram_determinant(kind, DEFAULT_CONVENTION, u, v) >= -1e-12


def test_random_band_limited_properties():
    rng = np.random.default_rng(0)
    f = random_band_limited(rng, 64, 5, 0.7, chart=True)
    assert f.at_zero() == 0.0
    assert np.max(np.abs(f.coefficients()[6:])) < 1e-12
    with pytest.raises(ValueError):
        random_band_limited(rng, 16, 8)
