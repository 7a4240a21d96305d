import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from spde_renorm import estimators as est
from spde_renorm.config import InitialSpec
from spde_renorm import spectral


def gaussian(n, seed=0):
    return np.random.default_rng(seed).standard_normal(n)


def test_lp_moment_constant_samples():
    e = est.lp_moment(np.full(100, -2.5), 3)
    assert_allclose(e.value, 2.5, rtol=1e-14)
    assert e.ci == 0.0


@pytest.mark.parametrize("p, target", [(2, 1.0), (4, 3 ** 0.25)])
def test_lp_moment_gaussian(p, target):
    e = est.lp_moment(gaussian(200_000), p)
    assert abs(e.value - target) < max(e.ci, 1e-3) * 1.5
    assert e.ci < 0.02


def test_mcstats_mean_and_variance():
    x = gaussian(20_000, 3) * 2 + 1
    s = est.MCStats().add(x, np.arange(x.size))
    assert_allclose(s.mean().value, x.mean(), rtol=1e-12)
    assert_allclose(s.variance().value, x.var(ddof=1), rtol=1e-10)
    assert s.variance().contains(4.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(40, 300), st.integers(1, 39), st.integers(0, 10_000))
def test_mcstats_merge_is_order_free(n, cut, seed):
    x = np.random.default_rng(seed).normal(size=n)
    idx = np.arange(n)
    whole = est.MCStats().add(x, idx)
    a = est.MCStats().add(x[:cut], idx[:cut])
    b = est.MCStats().add(x[cut:], idx[cut:])
    for merged in (a.merge(b), b.merge(a)):
        assert merged.count == whole.count
        assert_allclose(merged.sums, whole.sums, rtol=1e-12)


def test_empirical_cov_calibration():
    rng = np.random.default_rng(5)
    P = 4000
    w_s = rng.normal(size=P) * np.sqrt(0.2)
    w_t = w_s + rng.normal(size=P) * np.sqrt(0.5)
    same = est.empirical_cov(w_s, w_t, w_s, w_t)
    assert abs(same.value - 0.5) < 2 * same.ci
    v_s = rng.normal(size=P) * np.sqrt(0.2)
    v_t = v_s + rng.normal(size=P) * np.sqrt(0.5)
    cross = est.empirical_cov(w_s, w_t, v_s, v_t)
    assert abs(cross.value) < 2 * cross.ci + 0.02


def test_empirical_cov_needs_paths():
    with pytest.raises(ValueError, match="too few"):
        est.empirical_cov(np.zeros(10), np.ones(10), np.zeros(10), np.ones(10))


def test_ks_examples():
    a = gaussian(500)
    assert est.ks_two_sample(a, a).statistic == 0.0
    assert est.ks_two_sample(np.zeros(50), np.ones(70)).statistic == 1.0


def test_ks_matches_reference_statistic():
    from scipy import stats
    a, b = gaussian(300, 1), gaussian(400, 2) + 0.1
    assert_allclose(est.ks_two_sample(a, b).statistic, stats.ks_2samp(a, b).statistic, rtol=1e-14)


def test_ks_pvalue_uniform_under_null():
    pvals = [est.ks_two_sample(gaussian(10_000, 2 * s), gaussian(10_000, 2 * s + 1)).pvalue for s in range(60)]
    from scipy import stats
    assert stats.kstest(pvals, "uniform").pvalue > 0.001


def test_loglog_slope_examples():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    assert_allclose(est.loglog_slope(x, x ** 2).slope, 2.0, rtol=1e-12)
    assert_allclose(est.loglog_slope(x, np.full(4, 3.0)).slope, 0.0, atol=1e-12)
    rng = np.random.default_rng(9)
    xs = np.geomspace(1e-3, 1e-1, 12)
    fit = est.loglog_slope(xs, xs ** 0.625 * (1 + 0.01 * rng.normal(size=xs.size)))
    assert abs(fit.slope - 0.625) < 0.05


def test_loglog_slope_rejects_nonpositive():
    with pytest.raises(ValueError):
        est.loglog_slope([1, 2, 3], [1, 0, 2])


def test_holder_constant_fields_vanish():
    h = est.holder_seminorm(np.full((5, 64), 2.0), 0.25, 4)
    assert h.value == 0.0
    assert_allclose(h.sup_norm, 2.0)


def _weierstrass(depth, N):
    x = np.arange(N) / N
    return InitialSpec("weierstrass_quarter", 1.0, depth=depth)(x)[None, :]


def test_holder_quarter_stable_under_refinement():
    a = est.holder_seminorm(_weierstrass(6, 1024), 0.25, 4).value
    b = est.holder_seminorm(_weierstrass(6, 2048), 0.25, 4).value
    assert abs(b / a - 1) < 0.1


def test_holder_half_grows_with_depth():
    vals = [est.holder_seminorm(_weierstrass(d, 4096), 0.5, 4).value for d in (4, 6, 8)]
    ratios = np.array(vals[1:]) / np.array(vals[:-1])
    # each two extra octaves should multiply the seminorm by about 2^(2/4)
    assert np.all(ratios > 1.2) and np.all(ratios < 1.8)


def test_holder_is_monotone_in_pair_set():
    u = np.random.default_rng(0).normal(size=(20, 128))
    small = est.holder_seminorm(u, 0.25, 2, decades=0.5).value
    large = est.holder_seminorm(u, 0.25, 2).value
    assert large >= small


def test_dyadic_schedule_respects_budget():
    pairs = est.dyadic_pair_schedule(256, 64, decades=1.0)
    seps = sorted({d for _, d in pairs})
    assert seps == [1, 2, 4, 8]
    assert len(pairs) <= 64
