import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from cqdsim import sampling
from cqdsim.sampling import Distribution, SampleStream

ANISO = Distribution.ANISOTROPIC
ISO = Distribution.ISOTROPIC


def test_anisotropic_inverse_cdf_endpoints():
    theta = sampling.polar_from_uniform(np.array([0.0, 0.25, 1.0]), ANISO)
    np.testing.assert_allclose(theta, [0.0, math.pi / 2, math.pi], atol=1e-15)


def test_isotropic_median():
    assert float(sampling.polar_from_uniform(0.5, ISO)) == pytest.approx(math.pi / 2, abs=1e-15)


@pytest.mark.parametrize("dist", list(Distribution))
def test_inverse_cdf_inverts_cdf(dist):
    z = np.linspace(0, 1, 101)
    np.testing.assert_allclose(sampling.polar_cdf(sampling.polar_from_uniform(z, dist), dist), z, atol=1e-12)


def test_pdf_values():
    assert float(sampling.pdf(0.0, ANISO)) == 0.0
    assert float(sampling.pdf(math.pi, ANISO)) == pytest.approx(1 / (2 * math.pi))
    assert float(sampling.pdf(1.0, ISO)) == pytest.approx(1 / (4 * math.pi))
    with pytest.raises(ValueError):
        sampling.pdf(-0.1, ANISO)


@pytest.mark.parametrize("dist", list(Distribution))
def test_pdf_normalised(dist):
    total, _ = integrate.dblquad(
        lambda th, ph: float(sampling.pdf(th, dist)) * math.sin(th), 0, 2 * math.pi, 0, math.pi,
        epsabs=1e-12, epsrel=1e-12,
    )
    assert total == pytest.approx(1.0, abs=1e-9)


def test_anisotropic_mean_cos_oracle():
    # quadrature of the marginal density against the frozen value -1/3
    mean, _ = integrate.quad(lambda th: math.cos(th) * (1 - math.cos(th)) * math.sin(th) / 2, 0, math.pi)
    assert mean == pytest.approx(-1 / 3, abs=1e-12)


@pytest.mark.parametrize("dist,expected", [(ANISO, -1 / 3), (ISO, 0.0)])
def test_empirical_mean_cos(dist, expected):
    theta, _ = sampling.sample_block(2024, 0, 0, 1_000_000, dist)
    assert np.cos(theta).mean() == pytest.approx(expected, abs=0.003)


@pytest.mark.parametrize("dist", list(Distribution))
def test_ks_and_phi_independence(dist):
    from cqdsim.validation import sampler_check

    check = sampler_check(dist, n=200_000, seed=5)
    assert check.ks < 3 / math.sqrt(200_000)
    assert check.chi2_p > 0.01


def test_isotropic_ks_tight_bound():
    from scipy import stats

    theta, _ = sampling.sample_block(9, 1, 0, 1_000_000, ISO)
    assert stats.kstest(theta, lambda x: sampling.polar_cdf(x, ISO)).statistic < 0.002


def test_ranges():
    theta, phi = sampling.sample_block(3, 2, 0, 50_000, ANISO)
    assert theta.min() >= 0 and theta.max() <= math.pi
    assert phi.min() >= 0 and phi.max() < 2 * math.pi


def test_single_matches_block():
    theta, phi = sampling.sample_block(77, 4, 0, 40, ANISO)
    for i in (0, 1, 17, 39):
        o = sampling.sample_anisotropic(SampleStream(77, 4, i))
        assert (o.theta_n0, o.phi_n0) == (theta[i], phi[i])
    theta_i, _ = sampling.sample_block(77, 4, 0, 40, ISO)
    assert sampling.sample_isotropic(SampleStream(77, 4, 5)).theta_n0 == theta_i[5]


@settings(max_examples=30, deadline=None)
@given(
    seed=st.integers(0, 2**64 - 1),
    current_index=st.integers(0, 7),
    start=st.integers(0, 10_000),
    count=st.integers(1, 50),
    offset=st.integers(0, 49),
)
def test_sample_is_pure_function_of_indices(seed, current_index, start, count, offset):
    offset = min(offset, count - 1)
    block = sampling.uniforms(seed, current_index, start, count)
    single = sampling.uniforms(seed, current_index, start + offset, 1)
    assert np.array_equal(block[offset], single[0])


def test_substreams_differ():
    a = sampling.uniforms(1, 0, 0, 10)
    b = sampling.uniforms(1, 1, 0, 10)
    c = sampling.uniforms(2, 0, 0, 10)
    assert not np.array_equal(a, b) and not np.array_equal(a, c)
