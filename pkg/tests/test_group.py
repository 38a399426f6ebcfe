import numpy as np
import pytest
from hypothesis import given, strategies as st

from hs2.errors import ChartViolation, OrientationLost
from hs2.field import PeriodicField, derivative, grid
from hs2.group import (CircleDiffeo, GroupElement, TangentPair, ad_bracket, adjoint,
                       diffeo_compose, diffeo_invert, exp_approx, group_inverse,
                       group_product, lie_bracket)

from conftest import trig

TWO_PI = 2 * np.pi
N = 128


def bump(a, k=1, n=N, phase=0.0):
    x = grid(n)
    return CircleDiffeo(PeriodicField(a * np.sin(TWO_PI * k * x + phase) / (TWO_PI * k)))


def element(seed, n=N, chart=True):
    rng = np.random.default_rng(seed)
    x = grid(n)
    v = sum(rng.uniform(-0.01, 0.01) * np.sin(TWO_PI * k * x) / k for k in (1, 2, 3))
    f = sum(rng.standard_normal() * np.cos(TWO_PI * k * x + rng.uniform(0, 6)) for k in (0, 1, 2))
    return GroupElement(CircleDiffeo(PeriodicField(v), base_point_fixed=chart),
                        PeriodicField(f + 0 * x))


def tangent(seed, n=N):
    rng = np.random.default_rng(seed)
    x = grid(n)
    parts = [sum(0.3 * rng.standard_normal() * np.cos(TWO_PI * k * x + rng.uniform(0, 6)) / k
                 for k in (1, 2, 3)) for _ in range(2)]
    return TangentPair(PeriodicField(parts[0]), PeriodicField(parts[1]))


def test_validation():
    with pytest.raises(OrientationLost):
        bump(1.5)
    with pytest.raises(ChartViolation):
        CircleDiffeo(PeriodicField.constant(0.1, N), base_point_fixed=True)


def test_compose_examples():
    phi = bump(0.1)
    assert diffeo_compose(CircleDiffeo.identity(N), phi) is phi
    rot = diffeo_compose(CircleDiffeo.rotation(0.1, N), CircleDiffeo.rotation(0.25, N))
    assert rot.displacement.allclose(0.35, 1e-14)
    x = grid(N)
    v = lambda y: 0.1 * np.sin(TWO_PI * y) / TWO_PI
    dense = v(x + v(x)) + v(x)  # direct evaluation of phi o phi
    assert diffeo_compose(phi, phi).displacement.allclose(dense, 1e-9)


def test_invert_examples():
    assert diffeo_invert(CircleDiffeo.identity(N)).is_identity
    inv = diffeo_invert(CircleDiffeo.rotation(0.3, N))
    assert inv.displacement.allclose(-0.3, 1e-13)
    phi = bump(0.2)
    assert diffeo_compose(phi, diffeo_invert(phi)).displacement.sup_norm() < 1e-10
    assert diffeo_compose(diffeo_invert(phi), phi).displacement.sup_norm() < 1e-10


def test_invert_steep_map():
    # slope down to ~1e-4: Newton needs the safeguarded bracket
    phi = bump(0.9999, k=3)
    inv = diffeo_invert(phi)
    assert np.max(np.abs(phi(inv.values()) - grid(N))) < 1e-12


def test_invert_fixed_base_point():
    phi = CircleDiffeo(bump(0.3, k=2).displacement, base_point_fixed=True)
    inv = diffeo_invert(phi)
    assert inv.base_point_fixed and inv.displacement.at_zero() == 0.0


def test_product_examples():
    a = element(0)
    e = GroupElement.identity(N)
    assert (a * e).distance(a) == 0 and (e * a).distance(a) == 0
    assert (a * a.inverse()).distance(e) < 1e-9
    x = grid(N)
    a = GroupElement(CircleDiffeo.rotation(0.25, N), trig("sin", 1, N))
    b = GroupElement(CircleDiffeo.rotation(0.25, N), PeriodicField.zeros(N))
    ab = group_product(a, b)
    assert ab.phi.displacement.allclose(0.5, 1e-14)
    assert ab.f.allclose(np.sin(TWO_PI * (x + 0.25)), 1e-13)


def test_inverse_examples():
    e = GroupElement.identity(N)
    assert group_inverse(e).distance(e) == 0
    r = group_inverse(GroupElement(CircleDiffeo.rotation(0.2, N), PeriodicField.zeros(N)))
    assert r.phi.displacement.allclose(-0.2, 1e-13)
    a = GroupElement(bump(0.1), trig("cos", 1, N))
    assert group_product(a, group_inverse(a)).distance(e) < 1e-9


@given(st.integers(0, 10_000))
def test_associativity(seed):
    a, b, c = element(seed), element(seed + 1), element(seed + 2)
    assert ((a * b) * c).distance(a * (b * c)) < 1e-9


def test_adjoint_examples():
    t = tangent(0)
    same = adjoint(GroupElement.identity(N), t)
    assert (same - t).sup_norm() == 0
    x = grid(N)
    rot = GroupElement(CircleDiffeo.rotation(0.1, N), PeriodicField.zeros(N))
    moved = adjoint(rot, TangentPair.first(trig("sin", 1, N)))
    assert moved.u1.allclose(np.sin(TWO_PI * (x - 0.1)), 1e-12)
    assert moved.u2.sup_norm() < 1e-15


@given(st.integers(0, 10_000))
def test_adjoint_is_a_homomorphism(seed):
    a, b, t = element(seed), element(seed + 7), tangent(seed)
    assert (adjoint(a * b, t) - adjoint(a, adjoint(b, t))).sup_norm() < 1e-8
    assert (adjoint(a, adjoint(a.inverse(), t)) - t).sup_norm() < 1e-8


def test_bracket_examples():
    t = tangent(1)
    assert ad_bracket(t, t).sup_norm() == 0
    x = grid(N)
    s = TangentPair.first(trig("sin", 1, N))
    r = TangentPair.second(trig("cos", 1, N))
    out = ad_bracket(s, r)
    assert out.u1.sup_norm() == 0
    assert out.u2.allclose(-TWO_PI * np.sin(TWO_PI * x) ** 2, 1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_bracket_is_derivative_of_adjoint(seed):
    t, s = tangent(seed), tangent(seed + 100)
    eps = 1e-4
    fd = (adjoint(exp_approx(t, eps), s) - adjoint(exp_approx(t, -eps), s)) / (2 * eps)
    assert (fd - ad_bracket(s, t)).sup_norm() < 2e-6


@given(st.integers(0, 10_000), st.floats(-3, 3), st.floats(-3, 3))
def test_bracket_bilinear_antisymmetric(seed, a, b):
    s, t, r = tangent(seed), tangent(seed + 1), tangent(seed + 2)
    assert (ad_bracket(s, t) + ad_bracket(t, s)).sup_norm() == 0
    lhs = ad_bracket(s * a + r * b, t)
    rhs = ad_bracket(s, t) * a + ad_bracket(r, t) * b
    assert (lhs - rhs).sup_norm() < 1e-12 * (1 + lhs.sup_norm())


@given(st.integers(0, 10_000))
def test_jacobi_identity(seed):
    s, t, r = tangent(seed), tangent(seed + 1), tangent(seed + 2)
    total = (ad_bracket(s, ad_bracket(t, r)) + ad_bracket(t, ad_bracket(r, s))
             + ad_bracket(r, ad_bracket(s, t)))
    assert total.sup_norm() < 1e-9


def test_lie_bracket_formula():
    u, v = trig("sin", 1, N), trig("cos", 2, N)
    expected = derivative(v).samples * u.samples - derivative(u).samples * v.samples
    assert np.array_equal(lie_bracket(u, v).samples, expected)


def test_tangent_pair_grid_mismatch():
    with pytest.raises(ValueError):
        TangentPair(PeriodicField.zeros(16), PeriodicField.zeros(32))
