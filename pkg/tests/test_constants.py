import numpy as np
import pytest
from numpy.testing import assert_allclose

from spde_renorm import constants

# values below were computed once with 30-digit mpmath arithmetic
C0_MP = 8.8154622429336920e-3
LIMIT_COEFFICIENT_MP = 9.3890693058117810e-2
GAUSSIAN_X4_MP = 2.3997271706510215e-5


def test_c0_value():
    assert_allclose(constants.c0(), C0_MP, rtol=1e-15)


def test_limit_coefficient_value():
    assert_allclose(constants.limit_coefficient(), LIMIT_COEFFICIENT_MP, rtol=1e-15)
    assert 0 < constants.limit_coefficient() < 1


def test_c0_is_square_of_limit_coefficient():
    assert_allclose(constants.c0(), constants.limit_coefficient() ** 2, rtol=1e-15)


def test_c0_through_heat_norm_constant():
    assert_allclose(constants.c0_gaussian_route(), constants.c0(), rtol=1e-14)


def test_gaussian_integral_three_ways():
    closed = constants.gaussian_x4_integral()
    assert_allclose(closed, GAUSSIAN_X4_MP, rtol=1e-15)
    assert_allclose(constants.gaussian_x4_quadrature(), closed, rtol=1e-12)
    assert_allclose(constants.gaussian_moment_route(), closed, rtol=1e-14)
    assert closed > 0


def test_heat_norm_relative_error_at_small_time():
    assert abs(constants.heat_norm_relative_error(1e-4)) < 0.02


def test_heat_norm_asymptotic_error_bounded():
    vals = [constants.heat_norm_asymptotic_error(t) for t in np.geomspace(1e-6, 1e-2, 9)]
    assert np.all(np.isfinite(vals)) and max(vals) < 1.0


def test_heat_norm_error_is_exponentially_small():
    # the periodic correction is of order exp(-1/(8t)), invisible in double precision below t = 1e-3
    assert abs(constants.heat_norm_relative_error(1e-3)) < 1e-13
    assert 1e-4 < abs(constants.heat_norm_relative_error(1e-2)) < 1e-2


def test_variance_blowup_against_mode_sum_oracle():
    assert_allclose(constants.variance_blowup(0.5, 0.1), 0.20534315679345052, rtol=1e-13)
    assert_allclose(constants.variance_blowup(0.0, 0.05), 0.018236767003117188, rtol=1e-13)


def test_variance_blowup_gamma_zero_bounded():
    vals = [constants.variance_blowup(0.0, e) for e in (0.01, 0.005, 0.0025)]
    assert max(vals) / min(vals) < 1.3


@pytest.mark.parametrize("gamma", [0.25, 0.5, 0.75, 1.0])
def test_variance_blowup_monotone(gamma):
    vals = [constants.variance_blowup(gamma, e) for e in (0.1, 0.05, 0.025, 0.0125)]
    assert np.all(np.diff(vals) > 0)


def test_variance_blowup_rejects_bad_gamma():
    with pytest.raises(ValueError):
        constants.variance_blowup(1.5, 0.1)


def test_beta_variance_tends_to_c0():
    rel = [constants.beta_increment_variance(e, 2, 2 * int(np.ceil(2 / e)), 0.1, 1.0) / 0.9 / constants.c0()
           for e in (0.05, 0.02, 0.01)]
    assert abs(rel[-1] - 1) < 0.01
    assert abs(rel[-1] - 1) < abs(rel[0] - 1)


def test_beta_variance_scheme_close_to_continuous():
    a = constants.beta_increment_variance(0.05, 3, 80, 0.1, 1.0, dt=2.5e-4)
    b = constants.beta_increment_variance(0.05, 3, 80, 0.1, 1.0)
    assert abs(a / b - 1) < 1e-3


def test_convolution_point_variance_against_mode_sum_oracle():
    assert_allclose(constants.convolution_point_variance(0.05, 0.5), 0.016711381508160165, rtol=1e-13)


def test_constant_report_all_pass():
    reports = constants.constant_report()
    assert len(reports) == 5
    assert all(r.passed for r in reports)
