import math

import numpy as np
import pytest

from cqdsim import model
from cqdsim.config import EXPERIMENT_CURRENTS
from cqdsim.majorana_ode import (
    IntegrationError,
    NumericalBlowupError,
    OdeParams,
    final_polar_angle,
    integrate,
    rhs,
)

REF_ORIENTATION = (6 * math.pi / 7, 0.0)


def fraction_form(tau, f, df, k0, k1, w_n, phi0):
    phi = w_n * tau + phi0
    frac = math.sqrt(k1) * w_n / (4 * (math.sqrt(k1) - 1j * math.sqrt(k0) * np.exp(1j * phi)))
    return 4j * (tau - frac) * df - (k0 + k1 + 2 * math.sqrt(k0 * k1) * math.sin(phi)) * f


def expanded_form(tau, f, df, k0, k1, w_n, phi0):
    phi = w_n * tau + phi0
    lead = math.sqrt(k1) * w_n / (1j * math.sqrt(k1) + math.sqrt(k0) * np.exp(1j * phi))
    return (lead + 4j * tau) * df - (k1 + k0 + 2 * math.sqrt(k0 * k1) * math.sin(phi)) * f


def test_rhs_matches_both_printed_forms():
    p = OdeParams(k0=0.5, k1=0.3, w_n=0.4, phi_n0=1.0)
    f, df = 0.3 - 0.2j, 0.7 + 0.1j
    got = rhs(1.0, f, df, p)
    for form in (fraction_form, expanded_form):
        ref = form(1.0, f, df, 0.5, 0.3, 0.4, 1.0)
        assert abs(got - ref) <= 1e-12 * abs(ref)


def test_rhs_without_nuclear_coupling():
    p = OdeParams(k0=0.7, k1=0.0, w_n=0.3, phi_n0=0.2)
    f, df = 0.4 + 0.5j, -0.2 + 0.3j
    assert rhs(2.5, f, df, p) == pytest.approx(4j * 2.5 * df - 0.7 * f, rel=1e-14)
    assert rhs(2.5, 0, 0, OdeParams(0.5, 0.3, 0.4, 1.0)) == 0
    assert rhs(-3.0, 1.0, 0.5, OdeParams(0.0, 0.0, 0.0, 0.0)) == pytest.approx(4j * -3.0 * 0.5)


def test_final_polar_angle():
    assert final_polar_angle(0.0) == 0.0
    assert final_polar_angle(1.0) == pytest.approx(math.pi)
    assert final_polar_angle(1 / math.sqrt(2)) == pytest.approx(math.pi / 2)
    assert final_polar_angle(1.0 + 1e-9) == pytest.approx(math.pi)
    with pytest.raises(ValueError):
        final_polar_angle(-0.1)


def test_no_coupling_keeps_f_at_one():
    sol = integrate(OdeParams(k0=0.0, k1=0.0, w_n=0.0, phi_n0=0.0), trace=300)
    np.testing.assert_allclose(sol.trace_f, 1.0, atol=1e-14)
    assert sol.f_final_mag == pytest.approx(1.0)
    assert sol.theta_ef == pytest.approx(math.pi)


@pytest.mark.parametrize("k0", [0.05, 0.1, 0.5, 1.0, 2.0, 3.0])
def test_landau_zener_law(k0):
    # adiabatic start stands in for f(-inf) = 1; see test_zero_slope_start_transient
    sol = integrate(OdeParams(k0=k0, k1=0.0, w_n=0.0, phi_n0=0.0, initial_slope="adiabatic"))
    expected = math.exp(-math.pi * k0 / 2)
    assert abs(sol.f_final_mag**2 - expected) / expected < 0.02


def test_zero_slope_start_transient():
    """A sudden f'=0 start at tau=-30 perturbs |f|^2 by a few percent; extending the window shrinks it."""
    k0 = 1.0
    expected = math.exp(-math.pi * k0 / 2)
    errs = [
        abs(integrate(OdeParams(k0, 0.0, 0.0, 0.0, tau_start=ts)).f_final_mag ** 2 - expected) / expected
        for ts in (-30.0, -120.0)
    ]
    assert errs[0] < 0.05
    assert errs[1] < errs[0]


def _reference_params(current, **kw):
    p = model.derive(current, REF_ORIENTATION[0])
    return OdeParams(p.k0, p.k1, p.w_n, REF_ORIENTATION[1], **kw)


@pytest.mark.slow
@pytest.mark.parametrize("current", EXPERIMENT_CURRENTS)
def test_tolerance_convergence(current):
    a = integrate(_reference_params(current))
    b = integrate(_reference_params(current, rel_tol=5e-11, abs_tol=5e-11))
    assert abs(a.f_final_mag - b.f_final_mag) < 1e-6


@pytest.mark.slow
@pytest.mark.parametrize("current", [0.01, 0.1, 0.5])
def test_window_insensitivity_with_adiabatic_start(current):
    a = integrate(_reference_params(current, initial_slope="adiabatic"))
    b = integrate(_reference_params(current, initial_slope="adiabatic", tau_start=-60.0))
    assert abs(a.f_final_mag - b.f_final_mag) < 1e-4


@pytest.mark.parametrize("k0,k1,w_n,phi", [(2.14, 0.01, 0.13, 0.0), (0.21, 0.6, 0.4, 2.0), (0.043, 1.7, 0.88, 5.0)])
def test_unitarity_bound(k0, k1, w_n, phi):
    p = OdeParams(k0, k1, w_n, phi)
    sol = integrate(p)
    assert sol.max_abs_f <= 1 + 10 * p.rel_tol
    assert 0 <= sol.f_final_mag <= 1
    assert 0 <= sol.theta_ef <= math.pi


@pytest.mark.slow
@pytest.mark.parametrize("method", ["dopri5", "rk4"])
def test_methods_agree(method):
    ref = integrate(OdeParams(0.21, 0.6, 0.4, 2.0))
    other = integrate(OdeParams(0.21, 0.6, 0.4, 2.0, method=method))
    assert other.f_final_mag == pytest.approx(ref.f_final_mag, abs=1e-6)


def test_trace_covers_window_and_tail():
    p = _reference_params(0.1)
    sol = integrate(p, trace=500)
    assert sol.trace_tau.shape == (500,)
    assert sol.trace_tau[-1] == pytest.approx(60.0)
    assert sol.trace_tau[0] > -30.0
    rows = sol.trace_rows()
    assert rows[0][1] == pytest.approx(math.hypot(rows[0][2], rows[0][3]))
    # extra trace points shorten some steps, so agreement is only to solver tolerance
    assert integrate(p).f_final_mag == pytest.approx(sol.f_final_mag, abs=1e-8)
    with pytest.raises(ValueError):
        integrate(p, trace=np.array([-40.0, 0.0]))


def test_step_budget_error_carries_tau():
    with pytest.raises(IntegrationError) as info:
        integrate(OdeParams(0.5, 0.3, 0.4, 1.0, max_steps=50))
    assert -30.0 <= info.value.tau_reached < 60.0


def test_blowup_detected():
    with pytest.raises(NumericalBlowupError):
        integrate(OdeParams(1e200, 0.0, 0.0, 0.0))


@pytest.mark.parametrize(
    "kw",
    [dict(tau_start=0.0, tail_start=-1.0), dict(rel_tol=0.0), dict(method="euler"), dict(k1=-1.0), dict(n_tail=0)],
)
def test_param_validation(kw):
    base = dict(k0=0.5, k1=0.3, w_n=0.4, phi_n0=1.0)
    base.update(kw)
    with pytest.raises(ValueError):
        OdeParams(**base)
