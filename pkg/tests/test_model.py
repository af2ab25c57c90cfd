import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cqdsim import model
from cqdsim.model import PhysicalConstants

B_R = 0.42e-4
V = 800.0
Z_A = 1.05e-4


def test_gradient_values():
    # 2*pi / (4*pi*1e-7) = 1 / 2e-7
    assert model.gradient_from_current(0.01, B_R) == pytest.approx(B_R**2 / (2e-7 * 0.01), rel=1e-14)
    assert model.gradient_from_current(0.01, B_R) == pytest.approx(0.882, rel=1e-3)
    assert model.gradient_from_current(0.1, B_R) == pytest.approx(0.0882, rel=1e-3)


def test_gradient_halves_when_current_doubles():
    for current in (0.01, 0.07, 0.5):
        assert model.gradient_from_current(2 * current, B_R) == pytest.approx(
            model.gradient_from_current(current, B_R) / 2, rel=1e-15
        )


@pytest.mark.parametrize("current,b_r", [(0.0, B_R), (-0.1, B_R), (0.1, 0.0)])
def test_gradient_rejects_non_positive(current, b_r):
    with pytest.raises(ValueError):
        model.gradient_from_current(current, b_r)


@given(st.floats(1e-4, 10), st.floats(1e-4, 10))
def test_gradient_times_current_is_constant(i1, i2):
    assert model.gradient_from_current(i1, B_R) * i1 == pytest.approx(model.gradient_from_current(i2, B_R) * i2, rel=1e-13)


def test_torque_averaged_fields():
    c = model.DEFAULT_CONSTANTS
    # 5 mu0 / (16 pi) = 1.25e-7 exactly
    assert model.nuclear_field() == pytest.approx(1.25e-7 * c.mu_n / c.R_vdw**3, rel=1e-14)
    assert model.nuclear_field() == pytest.approx(1.19e-5, rel=5e-3)
    assert model.electron_field() == pytest.approx(5.58e-2, rel=1e-3)
    assert model.electron_field() / model.nuclear_field() == pytest.approx(4696, rel=1e-3)
    assert model.torque_averaged_field(0.0) == 0.0


def test_k0_values_and_closed_form():
    c = model.DEFAULT_CONSTANTS
    for current, expected in [(0.01, 2.14), (0.5, 0.0428)]:
        G = model.gradient_from_current(current, B_R)
        k0 = model.adiabaticity_k0(G, V, Z_A)
        assert k0 == pytest.approx(expected, rel=2e-3)
        closed = c.gamma_e_mag * 2 * math.pi * B_R**2 * Z_A**2 / (c.mu0 * current * V)
        assert k0 == pytest.approx(closed, rel=1e-12)


def test_k1_values():
    G = model.gradient_from_current(0.5, B_R)
    assert model.adiabaticity_k1(G, V, 0.0) == 0.0
    assert model.adiabaticity_k1(G, V, math.pi / 2) == pytest.approx(1.76, rel=5e-3)
    for theta in (0.3, 1.1, 2.0):
        assert model.adiabaticity_k1(G, V, math.pi - theta) == pytest.approx(model.adiabaticity_k1(G, V, theta), rel=1e-12)
    with pytest.raises(ValueError):
        model.adiabaticity_k1(G, V, 3.5)


def test_larmor_frequency():
    G = model.gradient_from_current(0.1, B_R)
    assert model.larmor_wn(G, V) == pytest.approx(0.395, rel=3e-3)
    # w_n scales as sqrt(I) through G ~ 1/I
    ratio = model.larmor_wn(model.gradient_from_current(0.4, B_R), V) / model.larmor_wn(G, V)
    assert ratio == pytest.approx(2.0, rel=1e-12)


def test_larmor_vanishes_without_electron_moment():
    G = model.gradient_from_current(0.1, B_R)
    tiny = PhysicalConstants(mu_e=1e-300)
    assert model.larmor_wn(G, V, tiny) == pytest.approx(0.0, abs=1e-270)


def test_constants_must_be_positive():
    with pytest.raises(ValueError):
        PhysicalConstants(mu_n=0.0)


def test_tau_map():
    p = model.derive(0.1, math.pi / 2)
    assert model.tau_of_t(0.0, p) == pytest.approx(0.0, abs=1e-15)
    t = np.linspace(-3e-6, 3e-6, 11)
    q = model.derive(0.1, 0.4)
    np.testing.assert_allclose(model.t_of_tau(model.tau_of_t(t, q), q), t, rtol=1e-12, atol=1e-22)
    assert np.all(np.diff(model.tau_of_t(t, q)) > 0)
    assert model.derive(0.1, 0.0).tau_offset == pytest.approx(-model.derive(0.1, math.pi).tau_offset, rel=1e-12)


def test_total_field_examples():
    p = model.derive(0.1, 6 * math.pi / 7)
    bare = model.derive(0.1, 0.0, constants=PhysicalConstants(mu_n=1e-300))
    t = 1.3e-6
    Bx, By, Bz = model.total_field(t, 0.0, 0.0, bare)
    assert (Bx, By) == pytest.approx((0.0, bare.G * Z_A))
    assert Bz == pytest.approx(bare.G * V * t, rel=1e-12)

    Bx, By, Bz = model.total_field(t, math.pi / 2, 0.0, p)
    assert Bx == pytest.approx(p.B_n_mag, rel=1e-12)
    assert By == pytest.approx(p.G * Z_A, rel=1e-12)
    assert Bz == pytest.approx(p.G * V * t, rel=1e-9)


@given(st.floats(0.0, math.pi), st.sampled_from([0.01, 0.02, 0.03, 0.05, 0.1, 0.2, 0.3, 0.5]))
def test_field_null_coincides_with_tau_zero(theta, current):
    p = model.derive(current, theta)
    t0 = model.t_of_tau(0.0, p)
    _, _, Bz = model.total_field(t0, theta, 0.0, p)
    assert abs(Bz) <= 1e-12 * p.B_n_mag + 1e-20
