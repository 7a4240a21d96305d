import numpy as np
import pytest
from numpy.testing import assert_allclose

from spde_renorm import sewing
from spde_renorm.config import InitialSpec, NonlinearitySpec, SimConfig


def test_additive_germ_is_fixed_point():
    L = 8
    t = np.linspace(0, 1, (1 << L) + 1)
    h = np.sin(3 * t) + t ** 2 + 0.7
    germ = sewing.additive_germ(h, L)
    for level in (0, 3, 8):
        out = sewing.sew(germ, level)
        assert_allclose(out.values[0], (h - h[0])[:: 1 << (L - level)], atol=1e-14)
        assert out.values[0, 0] == 0.0


def test_power_germ_sum():
    L, beta = 10, 0.625
    germ = sewing.power_germ(beta, L)
    for level in (2, 5, 9):
        n = 1 << level
        assert_allclose(sewing.sew(germ, level).values[0, -1], n * n ** -beta, rtol=1e-12)


def test_sew_rejects_bad_level():
    germ = sewing.power_germ(0.625, 4)
    with pytest.raises(ValueError):
        sewing.sew(germ, 5)


def test_germ_reports_offending_interval():
    germ = sewing.power_germ(0.625, 4)
    with pytest.raises(ValueError, match=r"\(5, 3\)"):
        germ(np.array([0, 5]), np.array([2, 3]))


def test_ito_germ_converges_at_half_rate():
    L = 14
    W = sewing.brownian_paths(3, np.arange(200), L)
    germ = sewing.ito_germ(W, L)
    exact = (W[:, -1] ** 2 - 1) / 2
    errs = [np.sqrt(np.mean((sewing.sew(germ, lev).values[:, -1] - exact) ** 2)) for lev in (6, 8, 10, 12, 14)]
    ratios = np.array(errs[1:]) / np.array(errs[:-1])
    assert np.all(ratios > 0.4) and np.all(ratios < 0.6)


def test_brownian_paths_are_brownian():
    W = sewing.brownian_paths(1, np.arange(2000), 6)
    assert W[:, 0].max() == 0.0
    assert abs(W[:, -1].var() - 1) < 0.1
    assert abs(W[:, 32].var() - 0.5) < 0.05


@pytest.fixture(scope="module")
def frozen_data():
    cfg = SimConfig(epsilon=0.2, dt=2.0 ** -10, nonlinearity=NonlinearitySpec("sine", 1.0),
                    initial=InitialSpec("constant", 0.5), coefficient=1.0)
    phi = np.zeros(cfg.mode_cutoff)
    phi[0], phi[2] = 1.0, 0.5
    return sewing.frozen_germ_data(cfg, np.arange(48), phi, range(1, 10), 8)


def test_frozen_germ_direct_sum_close_to_sewn(frozen_data):
    germ = sewing.frozen_germ(frozen_data)
    top = sewing.sew(germ, 8).values[:, -1]
    below = sewing.sew(germ, 7).values[:, -1]
    assert np.median(np.abs(top - frozen_data.direct[:, -1])) <= 2 * np.median(np.abs(top - below))


def test_frozen_germ_gaps_shrink(frozen_data):
    gaps = sewing.level_gaps(sewing.frozen_germ(frozen_data), range(2, 9))
    assert gaps[-1] < gaps[0]


def test_characterization_channels(frozen_data):
    germ = sewing.frozen_germ(frozen_data)
    sewn = sewing.sew(germ, 8).values
    assert sewing.characterization_check(sewn, germ).passed
    assert sewing.characterization_check(frozen_data.direct, germ).passed
    drifted = sewn + np.linspace(0, 1, sewn.shape[1])
    report = sewing.characterization_check(drifted, germ)
    assert not report.passed
    assert report.k1 > report.tolerance


def test_frozen_germ_vanishes_for_constant_g():
    cfg = SimConfig(epsilon=0.2, dt=2.0 ** -8, nonlinearity=NonlinearitySpec("constant", 1.0))
    phi = np.zeros(cfg.mode_cutoff)
    phi[0] = 1.0
    data = sewing.frozen_germ_data(cfg, [0, 1], phi, range(1, 4), 4)
    germ = sewing.frozen_germ(data)
    assert_allclose(sewing.sew(germ, 4).values, 0.0)


def test_frozen_germ_data_needs_dyadic_steps():
    cfg = SimConfig(epsilon=0.2, dt=1e-3)
    with pytest.raises(ValueError, match="power-of-two"):
        sewing.frozen_germ_data(cfg, [0], np.eye(cfg.mode_cutoff)[0], (1, 2), 4)
