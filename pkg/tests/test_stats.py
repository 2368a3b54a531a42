import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qofilter.stats import (
    chi2_cdf,
    chi2_quantile,
    chi2_sf,
    gaussian_vector,
    regularized_gamma,
    rng_from_seed,
)

# Frozen from scipy.stats.chi2 (and cross-checked by quadrature of the density).
CDF_18_307_DOF10 = 0.9499994109086018
MEDIAN_DOF1 = 0.454936423119572
MEDIAN_DOF3 = 2.3659738843753377
MEDIAN_DOF128 = 127.33395414332766


def test_cdf_at_zero():
    for n in (1, 2, 7, 128):
        assert chi2_cdf(0.0, n) == 0.0
        assert chi2_sf(0.0, n) == 1.0


def test_cdf_two_dof_is_exponential():
    assert abs(chi2_cdf(2 * math.log(2), 2) - 0.5) < 1e-14
    for t in (0.1, 1.0, 5.0, 30.0):
        assert abs(chi2_cdf(t, 2) - (1 - math.exp(-t / 2))) < 1e-13


def test_cdf_frozen_value():
    assert abs(chi2_cdf(18.307, 10) - CDF_18_307_DOF10) < 1e-12


def test_medians_frozen():
    assert abs(chi2_quantile(0.5, 1) - MEDIAN_DOF1) < 1e-10
    assert abs(chi2_quantile(0.5, 3) - MEDIAN_DOF3) < 1e-10
    assert abs(chi2_quantile(0.5, 128) - MEDIAN_DOF128) < 1e-8


def test_quantile_closed_form():
    assert abs(chi2_quantile(0.5, 2) - 2 * math.log(2)) < 1e-10


@pytest.mark.parametrize("gamma", [0.05, 0.5, 0.95])
@pytest.mark.parametrize("n", [1, 10, 128])
def test_quantile_round_trip(gamma, n):
    assert abs(chi2_cdf(chi2_quantile(gamma, n), n) - gamma) <= 1e-10


def test_quantile_extreme_tails():
    assert chi2_quantile(1e-12, 5) > 0
    t = chi2_quantile(1 - 1e-9, 4)
    assert abs(chi2_sf(t, 4) - 1e-9) < 1e-15


def test_sf_keeps_small_tails():
    # 1 - cdf would underflow to 0 here
    assert 0 < chi2_sf(400.0, 10) < 1e-70


def test_bad_arguments():
    with pytest.raises(ValueError):
        chi2_cdf(-1.0, 3)
    with pytest.raises(ValueError):
        chi2_cdf(1.0, 0)
    with pytest.raises(ValueError):
        chi2_quantile(1.5, 2)
    with pytest.raises(ValueError):
        chi2_quantile(0.0, 2)
    with pytest.raises(ValueError):
        regularized_gamma(0.0, 1.0)


@given(st.integers(1, 300), st.floats(0.0, 600.0), st.floats(0.0, 600.0))
def test_cdf_monotone(n, t1, t2):
    lo, hi = sorted((t1, t2))
    assert chi2_cdf(lo, n) <= chi2_cdf(hi, n) + 1e-15


@given(st.floats(0.01, 50.0), st.floats(0.0, 200.0))
def test_gamma_pair_sums_to_one(a, x):
    p, q = regularized_gamma(a, x)
    assert 0 <= p <= 1 and 0 <= q <= 1
    assert abs(p + q - 1) < 1e-12


@given(st.floats(0.001, 0.999), st.integers(1, 200))
def test_quantile_inverse_property(g, n):
    assert abs(chi2_cdf(chi2_quantile(g, n), n) - g) <= 1e-8


def test_gaussian_zero_sigma_returns_mean():
    mean = np.arange(5.0)
    assert np.array_equal(gaussian_vector(3, 5, mean=mean, sigma=0.0), mean)


def test_gaussian_deterministic():
    a = gaussian_vector(42, 100, sigma=2.0)
    b = gaussian_vector(42, 100, sigma=2.0)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, gaussian_vector(43, 100, sigma=2.0))


def test_gaussian_stream_is_pcg64_standard_normal():
    ref = np.random.Generator(np.random.PCG64(9)).standard_normal(4)
    assert np.array_equal(gaussian_vector(9, 4), ref)
    assert np.array_equal(rng_from_seed(9).standard_normal(4), ref)


def test_gaussian_moments():
    x = gaussian_vector(1, 10_000, sigma=100.0)
    assert abs(x.mean()) <= 4 * 100 / math.sqrt(10_000)
    assert abs(x.var() / 1e4 - 1) < 0.05


def test_gaussian_full_covariance():
    cov = np.array([[2.0, 0.8], [0.8, 1.0]])
    draws = np.array([gaussian_vector(s, 2, cov=cov) for s in range(4000)])
    assert np.allclose(np.cov(draws.T), cov, atol=0.15)


def test_gaussian_rejects_bad_input():
    with pytest.raises(ValueError):
        gaussian_vector(0, 2, cov=np.eye(2), sigma=1.0)
    with pytest.raises(ValueError):
        gaussian_vector(0, 2, sigma=-1.0)
    with pytest.raises(ValueError):
        gaussian_vector(-1, 2)
    with pytest.raises(ValueError):
        gaussian_vector(0, 2, cov=np.diag([1.0, -1.0]))
