import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from spde_renorm import spectral
from spde_renorm.config import (ALT_LIMIT_COEFFICIENT, LIMIT_COEFFICIENT, InitialSpec, NonlinearitySpec,
                                SimConfig)
from spde_renorm.noise import RngStream, noise_field_coeffs, sample_increments
from spde_renorm.solver import PathEnsemble, solve_path, solve_paths, step_limit, step_mollified
from spde_renorm.spectral import SpectralField


def small(**kw):
    base = dict(epsilon=0.2, t_end=0.1, nonlinearity=NonlinearitySpec("sine", 1.0),
                initial=InitialSpec("smooth_sine", 0.5))
    base.update(kw)
    return SimConfig(**base)


def test_config_defaults():
    cfg = SimConfig(epsilon=0.05)
    assert cfg.mode_cutoff == 80
    assert_allclose(cfg.dt, 2.5e-4)
    assert cfg.coefficient == 1.0
    lim = SimConfig(epsilon=0.0)
    assert lim.is_limit and lim.coefficient == LIMIT_COEFFICIENT


def test_config_validation():
    with pytest.raises(ValueError, match="mode_cutoff"):
        SimConfig(epsilon=0.05, mode_cutoff=20)
    with pytest.raises(ValueError, match="exceeds"):
        SimConfig(epsilon=0.1, dt=0.01)
    with pytest.raises(ValueError, match="step grid"):
        SimConfig(epsilon=0.1, save_times=(0.00015,))
    with pytest.raises(ValueError, match="multiple of dt"):
        SimConfig(epsilon=0.1, dt=0.0007)
    with pytest.raises(ValueError):
        NonlinearitySpec("cubic")


def test_default_step_divides_end_time():
    cfg = SimConfig(epsilon=0.4, t_end=0.5)
    assert cfg.dt <= 0.016 and cfg.n_steps * cfg.dt == pytest.approx(0.5)


def test_config_hash_tracks_content():
    assert SimConfig(epsilon=0.1).config_hash() == SimConfig(epsilon=0.1).config_hash()
    assert SimConfig(epsilon=0.1).config_hash() != SimConfig(epsilon=0.1, seed=1).config_hash()


@pytest.mark.parametrize("family", ["sine", "tanh", "linear", "constant"])
def test_nonlinearity_derivatives(family):
    g = NonlinearitySpec(family, 1.3)
    u = np.linspace(-2, 2, 41)
    h = 1e-6
    assert_allclose(g.dg(u), (g.g(u + h) - g.g(u - h)) / (2 * h), atol=1e-8)
    assert_allclose(g.gdg(u), g.g(u) * g.dg(u), atol=1e-14)


def test_zero_nonlinearity_is_heat_flow():
    cfg = small(nonlinearity=NonlinearitySpec("zero"))
    tr = solve_paths(cfg, [0, 1])
    psi = cfg.initial.coefficients(cfg.mode_cutoff)
    assert_allclose(tr.u[-1], np.tile(spectral.heat(psi, cfg.t_end), (2, 1)), atol=1e-15)


def test_heat_decay_of_sine_mode():
    cfg = small(nonlinearity=NonlinearitySpec("zero"), initial=InitialSpec("smooth_sine", 1.0, k=1))
    tr = solve_path(cfg, RngStream(cfg.seed, 0))
    psi = cfg.initial.coefficients(cfg.mode_cutoff)
    assert_allclose(tr.u[-1, 0, 1] / psi[1], np.exp(-0.4 * np.pi ** 2), rtol=1e-12)
    assert_allclose(np.exp(-0.4 * np.pi ** 2), 0.019296302911016772, rtol=1e-14)


def test_constant_nonlinearity_is_shifted_convolution():
    cfg = small(nonlinearity=NonlinearitySpec("constant", 1.0))
    tr = solve_paths(cfg, np.arange(3), track_x=True)
    psi = cfg.initial.coefficients(cfg.mode_cutoff)
    assert_allclose(tr.u[-1] - spectral.heat(psi, cfg.t_end), tr.x[-1], atol=1e-14)


def test_linear_from_zero_stays_zero():
    cfg = small(nonlinearity=NonlinearitySpec("linear"), initial=InitialSpec("constant", 0.0))
    assert_array_equal(solve_paths(cfg, [0, 5]).u[-1], 0.0)


def test_save_time_zero_returns_initial_projection():
    cfg = small(save_times=(0.0,))
    tr = solve_paths(cfg, [0])
    assert_allclose(tr.u[0, 0], cfg.initial.coefficients(cfg.mode_cutoff), rtol=0)


def test_paths_differ_but_share_hash():
    cfg = small()
    a = solve_path(cfg, RngStream(cfg.seed, 0))
    b = solve_path(cfg, RngStream(cfg.seed, 1))
    assert not np.allclose(a.u, b.u)
    assert a.meta["config_hash"] == b.meta["config_hash"]


def test_batching_and_workers_do_not_change_results(monkeypatch):
    import spde_renorm.solver as solver
    cfg = small(t_end=0.04)
    ref = solve_paths(cfg, np.arange(6), workers=1).u
    monkeypatch.setattr(solver, "PATH_BLOCK", 4)
    assert_array_equal(solve_paths(cfg, np.arange(6), workers=1).u, ref)
    assert_array_equal(solve_paths(cfg, np.arange(6), workers=2).u, ref)
    assert_array_equal(solve_paths(cfg, [4], workers=1).u[:, 0], ref[:, 4])


def test_single_step_matches_ensemble():
    cfg = small()
    stream = RngStream(cfg.seed, 2)
    inc, _ = sample_increments(stream, cfg.mode_cutoff, cfg.dt)
    u0 = SpectralField(cfg.initial.coefficients(cfg.mode_cutoff))
    one = step_mollified(u0, inc, cfg)
    ens = PathEnsemble(cfg, [2])
    ens.advance()
    assert_allclose(one.coeffs, ens.u[0], atol=1e-15)


def test_single_step_against_pointwise_formula():
    # mode j gets eps^(3/4) e^{-lambda dt/2} sum_m (grad P (e_j g(u)), e_m) dw_m
    cfg = small(epsilon=0.25, mode_cutoff=12, grid_size=64)
    M, eps, dt = 12, 0.25, cfg.dt
    u0 = SpectralField(cfg.initial.coefficients(M))
    inc, _ = sample_increments(RngStream(1, 0), M, dt)
    out = step_mollified(u0, inc, cfg).coeffs
    x = (np.arange(4096) + 0.5) / 4096
    B = spectral.basis_values(M, x)
    gu = np.sin(B @ u0.coeffs)
    expected = np.empty(M)
    lam = spectral.eigenvalues(M)
    for j in range(M):
        proj = B.T @ (B[:, j] * gu) / x.size  # coefficients of e_j g(u), exact up to quadrature
        drive = spectral.gradient(spectral.heat(proj, eps * eps)) @ inc.dw
        expected[j] = np.exp(-lam[j] * dt) * u0.coeffs[j] + eps ** 0.75 * np.exp(-lam[j] * dt / 2) * drive
    assert_allclose(out, expected, atol=1e-10)


def test_limit_step_degenerate_cases():
    for g in (NonlinearitySpec("zero"), NonlinearitySpec("constant", 2.0)):
        cfg = SimConfig(epsilon=0.0, t_end=0.1, nonlinearity=g, initial=InitialSpec("smooth_sine", 0.3))
        u0 = SpectralField(cfg.initial.coefficients(cfg.mode_cutoff))
        inc, _ = sample_increments(RngStream(0, 0), cfg.mode_cutoff, cfg.dt)
        assert_allclose(step_limit(u0, inc, cfg).coeffs, spectral.heat(u0.coeffs, cfg.dt), atol=1e-16)


def test_step_functions_check_regime():
    cfg = small()
    u0 = SpectralField(np.zeros(cfg.mode_cutoff))
    inc, _ = sample_increments(RngStream(0, 0), cfg.mode_cutoff, cfg.dt)
    with pytest.raises(ValueError):
        step_limit(u0, inc, cfg)


def test_limit_linear_preserves_mean_of_first_mode():
    cfg = SimConfig(epsilon=0.0, t_end=0.2, nonlinearity=NonlinearitySpec("linear"),
                    initial=InitialSpec("constant", 1.0))
    tr = solve_paths(cfg, np.arange(400))
    first = tr.u[-1, :, 0]
    assert abs(first.mean() - 1.0) < 4 * first.std(ddof=1) / np.sqrt(first.size)
    assert first.std() > 0


def test_alternative_coefficient_is_twice_the_limit_one():
    assert_allclose(ALT_LIMIT_COEFFICIENT, 2 * LIMIT_COEFFICIENT, rtol=1e-15)


def test_noise_field_has_no_constant_mode():
    dw = np.random.default_rng(0).normal(size=9)
    assert noise_field_coeffs(dw, 0.1)[0] == 0.0
