import cmath
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diskwalk.errors import DomainError, PoleMismatchError
from diskwalk.geometry import DiskPoint, Pole, on_orbit_circle, poincare_distance, to_bipolar
from diskwalk.group import (
    GroupElement,
    apply,
    apply_Tz,
    compose,
    compose_all,
    from_x,
    gamma_of_x,
    identity,
    tau_hat,
)

LOG3 = math.log(3.0)


def q(x, alpha, z):
    """Reference gyrotranslation by direct complex arithmetic."""
    return (z + x * alpha) / (1 + x * alpha.conjugate() * z)


def test_from_x_examples():
    assert from_x(0.0).gamma == 0.0
    assert from_x(0.5).gamma == pytest.approx(LOG3, abs=1e-15)
    assert from_x(-0.5).gamma == pytest.approx(-LOG3, abs=1e-15)
    for bad in (1.0, -1.0, 1.5):
        with pytest.raises(DomainError):
            from_x(bad)


def test_x_and_rho_recovered():
    g = from_x(0.3)
    assert g.x == pytest.approx(0.3, abs=1e-15)
    assert g.rho == pytest.approx(1.3 / 0.7)
    assert float(gamma_of_x(1e-20)) == pytest.approx(2e-20)


def test_compose_examples():
    g = from_x(0.5)
    gg = compose(g, g)
    assert gg.gamma == pytest.approx(math.log(9.0), abs=1e-15)
    assert gg.x == pytest.approx(0.8, abs=1e-15)
    assert compose(g, identity()) == g
    assert compose(g, g.inverse()).gamma == 0.0
    assert (g @ g).gamma == gg.gamma


def test_compose_matches_brute_force_on_points():
    rng = np.random.default_rng(3)
    g = from_x(0.5)
    gg = compose(g, g)
    for _ in range(20):
        z = cmath.rect(0.95 * math.sqrt(rng.random()), rng.uniform(-math.pi, math.pi))
        assert apply(gg, z).z == pytest.approx(q(0.5, 1, q(0.5, 1, z)), abs=1e-12)


def test_pole_mismatch():
    with pytest.raises(PoleMismatchError):
        compose(GroupElement(1.0, Pole(1)), GroupElement(1.0, Pole(1j)))


def test_apply_examples():
    assert apply(GroupElement(LOG3), 0).z == pytest.approx(0.5, abs=1e-15)
    assert apply(GroupElement(LOG3), 1j).z == pytest.approx(0.8 + 0.6j, abs=1e-15)
    for gamma in (-50.0, -1.0, 2.5, 40.0):
        assert apply(GroupElement(gamma), 1).z == 1
        assert apply(GroupElement(gamma), -1).z == -1


def test_apply_saturation():
    p = apply(GroupElement(800.0), 0.3j)
    assert p.saturated and p.z == 1
    p = apply(GroupElement(-800.0), 0.3j)
    assert p.saturated and p.z == -1
    # the repelling pole stays put
    assert apply(GroupElement(800.0), -1).z == -1


@settings(max_examples=300, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(0, 0.99), st.floats(-math.pi, math.pi),
       st.floats(-math.pi, math.pi))
def test_action_is_a_homomorphism(g1, g2, r, t, a):
    alpha = cmath.exp(1j * a)
    pole = Pole(alpha)
    z = cmath.rect(r, t)
    e1, e2 = GroupElement(g1, pole), GroupElement(g2, pole)
    lhs = apply(compose(e1, e2), z).z
    assert lhs == pytest.approx(apply(e1, apply(e2, z)).z, abs=1e-12)
    assert lhs == pytest.approx(apply(e2, apply(e1, z)).z, abs=1e-12)
    assert lhs == pytest.approx(q(math.tanh((g1 + g2) / 2), alpha, z), abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(st.floats(-20, 20), st.floats(0, 0.99), st.floats(0, 0.99), st.floats(-3, 3), st.floats(-3, 3))
def test_isometry(gamma, r1, r2, t1, t2):
    z, w = cmath.rect(r1, t1), cmath.rect(r2, t2)
    g = GroupElement(gamma)
    assert poincare_distance(apply(g, z), apply(g, w)) == pytest.approx(
        poincare_distance(z, w), abs=1e-10)


def test_diameter_invariance():
    alpha = cmath.exp(0.3j)
    for x in (-0.9, -0.2, 0.0, 0.4, 0.95):
        for y in (-0.7, 0.1, 0.6):
            img = apply(from_x(y, Pole(alpha)), x * alpha).z
            assert img == pytest.approx(alpha * (x + y) / (1 + x * y), abs=1e-12)


def test_permutation_invariance_is_exact():
    rnd = random.Random(5)
    els = [GroupElement(rnd.gauss(0, 3)) for _ in range(1000)]
    shuffled = els[:]
    rnd.shuffle(shuffled)
    assert compose_all(els).gamma == compose_all(shuffled).gamma
    assert compose_all([]).gamma == 0.0


def test_framed_points_keep_precision_far_out():
    # 60 steps of gamma=1 from 0.2i: tau must be exactly 60 + tau(0.2i)
    z = DiskPoint(0.0, 0.2)
    tau0 = to_bipolar(z).tau
    p = z
    for _ in range(60):
        p = apply(GroupElement(1.0), p)
    assert to_bipolar(p).tau == pytest.approx(tau0 + 60.0, abs=1e-11)
    assert on_orbit_circle(p, z)


def test_apply_Tz_examples():
    z = 0.5j
    assert apply_Tz(z, 0).z == pytest.approx(z)
    assert apply_Tz(z, 1).z == pytest.approx(1)
    assert apply_Tz(z, -1).z == pytest.approx(-1)
    assert apply_Tz(z, 0.5).z == pytest.approx((0.5j + 0.5) / (1 + 0.25j), abs=1e-15)


def test_tau_hat():
    z = 0.3 + 0.4j
    assert tau_hat(z, 0.0).z == pytest.approx(z)
    assert tau_hat(0, LOG3).z == pytest.approx(0.5)
    # tau_hat traces the orbit of the walk
    for d in (-2.0, 0.7, 3.0):
        assert tau_hat(z, d).z == pytest.approx(apply(GroupElement(d), z).z, abs=1e-12)
    # on the diameter the parametrization is isometric
    for x in (0.0, 0.3, -0.6):
        assert poincare_distance(tau_hat(x, 0.4), tau_hat(x, 2.9)) == pytest.approx(2.5, abs=1e-10)


def test_tau_hat_off_diameter_follows_hypercycle():
    # off l_alpha the arc is an equidistant curve at distance h from the axis:
    # sinh(d/2) = cosh(h) sinh(|d1 - d2|/2), with sinh h = 2|Im z|/(1-|z|^2)
    for z in (0.3 + 0.4j, -0.5 + 0.1j, 0.2 - 0.7j):
        h = math.asinh(2 * abs(z.imag) / (1 - abs(z) ** 2))
        d = poincare_distance(tau_hat(z, 0.4), tau_hat(z, 2.9))
        assert d == pytest.approx(2 * math.asinh(math.cosh(h) * math.sinh(1.25)), abs=1e-10)
        assert d > 2.5
