"""Experiment suites: each turns a flat configuration into rows of estimate, interval, target and verdict.

Rows are produced lazily so a runner can flush them as they come. Every
number in a row is a deterministic function of the configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from . import constants, sewing, spectral
from .config import (ALT_LIMIT_COEFFICIENT, LIMIT_COEFFICIENT, PLACEMENTS, InitialSpec,
                     NonlinearitySpec, SimConfig)
from .estimators import MCStats, correlation, holder_seminorm, ks_bootstrap_ci, ks_two_sample, loglog_slope
from .functionals import decompose_increment
from .solver import solve_paths

SCHEMA_VERSION = 1

DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "seed": 20240611,
    "epsilon": 0.05,
    "epsilons": [0.2, 0.1, 0.05],
    "paths": 4096,
    "modes": [2, 3, 4, 5],
    "g": "sine",
    "g_a": 1.0,
    "psi": "constant",
    "psi_a": 0.5,
    "t_end": 1.0,
    "x0": 0.0,
    "s": 0.25,
    "placement": "half",
    "level_max": 14,
    "sewing_level": 12,
}

SUITE_DEFAULTS = {
    "constants": {},
    "heat-check": {},
    "blowup-curve": {"epsilons": [0.1, 0.05, 0.025, 0.0125]},
    "beta-stats": {"epsilons": [0.2, 0.1, 0.05], "paths": 4096},
    "simulate": {"epsilon": 0.1, "paths": 64},
    "converge": {"epsilons": [0.4, 0.2, 0.1, 0.05], "paths": 4096, "t_end": 0.5},
    "decompose": {"epsilon": 0.05, "epsilons": [0.1, 0.05, 0.025], "paths": 64, "t_end": 0.5},
    "sewing-check": {"epsilon": 0.1, "paths": 64},
    "holder-norms": {"epsilon": 0.05, "epsilons": [0.2, 0.1, 0.05], "paths": 256},
}


def _positive_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) and v > 0


def _nonneg_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) and v >= 0


def _positive_int(v):
    return isinstance(v, int) and not isinstance(v, bool) and v > 0


FIELDS = {
    "schema_version": (lambda v: v == SCHEMA_VERSION, f"must equal {SCHEMA_VERSION}"),
    "seed": (lambda v: isinstance(v, int) and not isinstance(v, bool) and 0 <= v < 2 ** 63,
             "non-negative integer below 2^63"),
    "epsilon": (_nonneg_number, "non-negative number"),
    "epsilons": (None, "non-empty list of non-negative numbers"),
    "paths": (_positive_int, "positive integer"),
    "modes": (None, "non-empty list of positive integers"),
    "g": (lambda v: v in ("zero", "constant", "linear", "sine", "tanh"),
          "one of zero, constant, linear, sine, tanh"),
    "g_a": (lambda v: isinstance(v, (int, float)) and math.isfinite(v), "finite number"),
    "psi": (lambda v: v in ("constant", "smooth_sine", "weierstrass_quarter"),
            "one of constant, smooth_sine, weierstrass_quarter"),
    "psi_a": (lambda v: isinstance(v, (int, float)) and math.isfinite(v), "finite number"),
    "t_end": (lambda v: _positive_number(v) and v <= 1, "number in (0, 1]"),
    "x0": (lambda v: isinstance(v, (int, float)) and math.isfinite(v), "finite number"),
    "s": (lambda v: _nonneg_number(v) and v < 1, "number in [0, 1)"),
    "placement": (lambda v: v in PLACEMENTS, "one of " + ", ".join(PLACEMENTS)),
    "level_max": (lambda v: _positive_int(v) and v <= 14, "integer in [1, 14]"),
    "sewing_level": (lambda v: _positive_int(v) and v <= 14, "integer in [1, 14]"),
}


class ConfigError(ValueError):
    pass


def validate_config(raw: dict) -> list[str]:
    """Schema violations as ``config.<field>[index]: message`` strings."""
    problems = []
    for key, value in raw.items():
        if key not in FIELDS:
            problems.append(f"config.{key}: unknown field")
            continue
        check, msg = FIELDS[key]
        if key == "epsilons":
            if not isinstance(value, list) or not value:
                problems.append(f"config.{key}: expected {msg}")
            else:
                problems += [f"config.{key}[{i}]: expected non-negative number"
                             for i, v in enumerate(value) if not _nonneg_number(v)]
        elif key == "modes":
            if not isinstance(value, list) or not value:
                problems.append(f"config.{key}: expected {msg}")
            else:
                problems += [f"config.{key}[{i}]: expected positive integer"
                             for i, v in enumerate(value) if not _positive_int(v)]
        elif not check(value):
            problems.append(f"config.{key}: expected {msg}, got {value!r}")
    return problems


def resolve_config(suite: str, file_values: dict | None = None, overrides: dict | None = None) -> dict:
    """Defaults, then suite defaults, then the config file, then command-line overrides."""
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}")
    cfg = dict(DEFAULTS)
    cfg.update(SUITE_DEFAULTS[suite])
    for layer in (file_values or {}, overrides or {}):
        problems = validate_config(layer)
        if problems:
            raise ConfigError("; ".join(problems))
        cfg.update(layer)
    return cfg


@dataclass(frozen=True)
class Row:
    suite: str
    metric: str
    parameters: str
    estimate: float
    ci: float
    target: float
    tolerance: float
    verdict: str  # "pass", "fail" or "info"

    @property
    def failed(self) -> bool:
        return self.verdict == "fail"


def _params(**kw) -> str:
    parts = []
    for k, v in kw.items():
        if isinstance(v, float):
            v = repr(v)
        parts.append(f"{k}={v}")
    return ";".join(parts)


def _check(kind: str, est: float, target: float, tol: float) -> bool:
    if not np.isfinite(est):
        return False
    if kind == "abs":
        return abs(est - target) <= tol
    if kind == "rel":
        return abs(est - target) <= tol * abs(target)
    if kind == "max":
        return est <= target
    if kind == "min":
        return est >= target
    raise ValueError(kind)


class _Emitter:
    def __init__(self, suite):
        self.suite = suite

    def gate(self, metric, params, est, ci, target, tol, kind):
        ok = _check(kind, float(est), float(target), float(tol))
        return Row(self.suite, metric, params, float(est), float(ci), float(target), float(tol),
                   "pass" if ok else "fail")

    def info(self, metric, params, est, ci=0.0, target=np.nan, tol=np.nan):
        return Row(self.suite, metric, params, float(est), float(ci), float(target), float(tol), "info")


def _nonlinearity(cfg) -> NonlinearitySpec:
    return NonlinearitySpec(cfg["g"], float(cfg["g_a"]))


def _initial(cfg) -> InitialSpec:
    return InitialSpec(cfg["psi"], float(cfg["psi_a"]))


def _test_function(M: int) -> np.ndarray:
    """phi = e_1 + e_3 / 2 = 1 + cos(2 pi x) / sqrt(2)."""
    phi = np.zeros(M)
    phi[0], phi[2] = 1.0, 0.5
    return phi


def _paths(cfg) -> np.ndarray:
    return np.arange(cfg["paths"])


# --- constants and deterministic checks ---------------------------------------------------------

def suite_constants(cfg) -> Iterator[Row]:
    em = _Emitter("constants")
    for rep in constants.constant_report():
        yield em.gate(rep.name, "", rep.closed_form, 0.0, rep.oracle, rep.tolerance, "rel")
    # 30-digit values of the closed forms, computed once with mpmath
    yield em.gate("c0 value", "", constants.c0(), 0.0, 8.8154622429336920e-3, 1e-14, "rel")
    yield em.gate("limit coefficient value", "", constants.limit_coefficient(), 0.0,
                  9.3890693058117810e-2, 1e-14, "rel")


HEAT_T_GRID = tuple(10.0 ** np.linspace(-6, -2, 9))


def suite_heat_check(cfg) -> Iterator[Row]:
    em = _Emitter("heat-check")
    rel = []
    for t in HEAT_T_GRID:
        r = constants.heat_norm_relative_error(t)
        rel.append(abs(r))
        yield em.info("relative error", _params(t=t), r)
    yield em.gate("relative error at t=1e-4", _params(t=1e-4),
                  abs(constants.heat_norm_relative_error(1e-4)), 0.0, 0.0, 0.02, "abs")
    scaled = max(constants.heat_norm_asymptotic_error(t) for t in HEAT_T_GRID)
    yield em.gate("max of |direct - leading| t^2 over t grid", "t=1e-6..1e-2", scaled, 0.0, 1.0, 0.0, "max")
    # errors that vanish in double precision are floored at one ulp so the fit stays finite
    floor = np.finfo(float).eps
    fit = loglog_slope(HEAT_T_GRID, np.maximum(rel, floor))
    yield em.gate("relative error slope vs t", "t=1e-6..1e-2", fit.slope, fit.ci, 0.5, 0.1, "abs")


def suite_blowup_curve(cfg) -> Iterator[Row]:
    em = _Emitter("blowup-curve")
    eps = sorted(cfg["epsilons"], reverse=True)
    values = {g: np.array([constants.variance_blowup(g, e) for e in eps]) for g in (0.0, 0.25, 0.5, 0.75, 1.0)}
    for g, vals in values.items():
        for e, v in zip(eps, vals):
            yield em.info("variance", _params(gamma=g, epsilon=e), v)
    fit = loglog_slope(eps, values[0.5])
    yield em.gate("slope vs epsilon", _params(gamma=0.5), fit.slope, fit.ci, -1.0, 0.1, "abs")
    v0 = values[0.0]
    yield em.gate("relative change over grid", _params(gamma=0.0), v0.max() / v0.min() - 1, 0.0, 0.0, 0.05, "abs")
    diffs = np.diff(values[0.25])
    yield em.gate("spread of successive differences", _params(gamma=0.25),
                  diffs.max() / diffs.min() - 1, 0.0, 0.0, 0.1, "abs")
    bad = sum(int(np.any(np.diff(values[g]) <= 0)) for g in (0.25, 0.5, 0.75, 1.0))
    yield em.gate("non-monotone curves for gamma >= 1/4", "", bad, 0.0, 0.0, 0.0, "abs")


# --- Monte Carlo suites ---------------------------------------------------------------------------

BETA_WINDOW = (0.1, 1.0)


def suite_beta_stats(cfg) -> Iterator[Row]:
    em = _Emitter("beta-stats")
    modes = tuple(cfg["modes"])
    eps_list = sorted(cfg["epsilons"], reverse=True)
    if min(eps_list) <= 0:
        raise ConfigError("config.epsilons: beta-stats needs epsilon > 0")
    gate_eps = eps_list[-1]
    paths = _paths(cfg)
    c0 = constants.c0()
    s, t = BETA_WINDOW
    dev_mc, dev_exact = [], []
    for eps in eps_list:
        M = 2 * math.ceil(2.0 / eps)
        run = SimConfig(epsilon=eps, mode_cutoff=M, grid_size=spectral.min_grid_size(M),
                        nonlinearity=NonlinearitySpec("linear"), placement=cfg["placement"],
                        save_times=BETA_WINDOW, seed=cfg["seed"])
        tr = solve_paths(run, paths, solve_u=False, beta_modes=modes)
        inc = tr.beta.increments(s, t)
        rates, exact_rates = [], []
        for k, n in enumerate(modes):
            var = MCStats().add(inc[:, k], paths).variance()
            rate, ci = var.value / (t - s), var.ci / (t - s)
            exact = constants.beta_increment_variance(eps, n, M, s, t, dt=run.dt,
                                                      placement=PLACEMENTS[run.placement]) / (t - s)
            rates.append(rate)
            exact_rates.append(exact)
            p = _params(epsilon=eps, n=n, M=M, dt=run.dt, paths=paths.size)
            if eps == gate_eps:
                yield em.gate("variance rate vs c0", p, rate, ci, c0, 0.1, "rel")
            else:
                yield em.info("variance rate vs c0", p, rate, ci, c0, 0.1)
            yield em.gate("variance rate vs exact finite-eps value", p, rate, ci, exact, 2 * ci, "abs")
        dev_mc.append(abs(np.mean(rates) / c0 - 1))
        dev_exact.append(abs(np.mean(exact_rates) / c0 - 1))
        yield em.info("mean relative deviation from c0", _params(epsilon=eps), dev_mc[-1])
        yield em.info("exact mean relative deviation from c0", _params(epsilon=eps), dev_exact[-1])
        if eps == gate_eps and len(modes) > 1:
            bound = 4.0 / math.sqrt(paths.size)
            for a in range(len(modes)):
                for b in range(a + 1, len(modes)):
                    r = correlation(inc[:, a], inc[:, b])
                    yield em.gate("correlation", _params(epsilon=eps, n=modes[a], m=modes[b]),
                                  abs(r), 0.0, 0.0, bound, "abs")
    if len(eps_list) >= 3:
        fit = loglog_slope(eps_list, dev_mc)
        yield em.gate("deviation slope vs epsilon", _params(epsilons=",".join(map(str, eps_list))),
                      fit.slope, fit.ci, 0.55, 0.25, "abs")
        fit = loglog_slope(eps_list, dev_exact)
        yield em.info("exact deviation slope vs epsilon", _params(epsilons=",".join(map(str, eps_list))),
                      fit.slope, fit.ci, 0.55, 0.25)


def _sim_config(cfg, eps: float, **kw) -> SimConfig:
    base = dict(epsilon=eps, t_end=cfg["t_end"], nonlinearity=_nonlinearity(cfg),
                initial=_initial(cfg), placement=cfg["placement"], seed=cfg["seed"])
    base.update(kw)
    return SimConfig(**base)


def _point_values(u: np.ndarray, x0: float) -> np.ndarray:
    return u @ spectral.basis_values(u.shape[-1], np.array([x0]))[0]


def suite_simulate(cfg) -> Iterator[Row]:
    em = _Emitter("simulate")
    eps = float(cfg["epsilon"])
    run = _sim_config(cfg, eps)
    paths = _paths(cfg)
    tr = solve_paths(run, paths)
    uT = tr.u[-1]
    vals = _point_values(uT, cfg["x0"])
    p = _params(epsilon=eps, M=run.mode_cutoff, dt=run.dt, T=run.t_end, x0=float(cfg["x0"]), paths=paths.size,
                config_hash=run.config_hash())
    stats_ = MCStats().add(vals, paths)
    yield em.info("mean of u_T(x0)", p, stats_.mean().value, stats_.mean().ci)
    if paths.size >= 2:
        yield em.info("variance of u_T(x0)", p, stats_.variance().value, stats_.variance().ci)
    if cfg["g"] == "zero":
        heat = spectral.heat(run.initial.coefficients(run.mode_cutoff), run.t_end)
        gap = float(np.max(np.abs(uT - heat)))
        yield em.gate("deterministic check", p, gap, 0.0, 1e-12, 0.0, "max")


def suite_converge(cfg) -> Iterator[Row]:
    em = _Emitter("converge")
    eps_list = sorted((e for e in cfg["epsilons"] if e > 0), reverse=True)
    paths = _paths(cfg)
    x0 = float(cfg["x0"])
    limit = _sim_config(cfg, 0.0, coefficient=LIMIT_COEFFICIENT)
    lim_u = solve_paths(limit, paths).u[-1]
    lim = _point_values(lim_u, x0)
    alt_u = solve_paths(limit.with_(coefficient=ALT_LIMIT_COEFFICIENT), paths).u[-1]
    alt = _point_values(alt_u, x0)
    ks_vals, ks_cis = [], []
    samples = None
    for eps in eps_list:
        run = _sim_config(cfg, eps)
        u = solve_paths(run, paths).u[-1]
        samples = _point_values(u, x0)
        ks = ks_two_sample(samples, lim)
        ci = ks_bootstrap_ci(samples, lim, seed=cfg["seed"] % (2 ** 32))
        ks_vals.append(ks.statistic)
        ks_cis.append(ci)
        p = _params(epsilon=eps, T=run.t_end, x0=x0, paths=paths.size)
        yield em.info("KS statistic vs limit", p, ks.statistic, ci)
        yield em.info("KS p-value", p, ks.pvalue)
        yield em.info("variance of u_T(x0)", p, samples.var(ddof=1))
        yield em.info("variance of spatial mean", p, u[:, 0].var(ddof=1))
    rises = [ks_vals[i + 1] - ks_vals[i] - math.hypot(ks_cis[i], ks_cis[i + 1]) for i in range(len(ks_vals) - 1)]
    yield em.gate("largest KS rise beyond CI as epsilon decreases", "", max(rises, default=0.0), 0.0, 0.0, 0.0, "max")
    finest = _params(epsilon=eps_list[-1], paths=paths.size)
    m1 = MCStats().add(samples, paths).mean()
    yield em.gate("first moment vs limit", finest, m1.value, m1.ci, float(lim.mean()), 0.15, "rel")
    yield em.gate("second moment vs limit", finest, float(np.mean(samples ** 2)), 0.0,
                  float(np.mean(lim ** 2)), 0.15, "rel")
    var_moll = float(samples.var(ddof=1))
    var_lim = float(lim.var(ddof=1))
    var_alt = float(alt.var(ddof=1))
    yield em.info("variance of limit u_T(x0)", _params(coefficient=LIMIT_COEFFICIENT), var_lim)
    yield em.info("variance of spatial mean, limit", _params(coefficient=LIMIT_COEFFICIENT), lim_u[:, 0].var(ddof=1))
    yield em.gate("variance with coefficient 1/(8 pi^(1/4)) vs mollified",
                  _params(coefficient=LIMIT_COEFFICIENT), var_lim, 0.0, var_moll, 0.15, "rel")
    yield em.gate("relative variance gap with coefficient 1/(4 pi^(1/4))",
                  _params(coefficient=ALT_LIMIT_COEFFICIENT), abs(var_alt / var_moll - 1), 0.0, 0.5, 0.0, "min")


def suite_decompose(cfg) -> Iterator[Row]:
    em = _Emitter("decompose")
    paths = _paths(cfg)
    eps = float(cfg["epsilon"])
    s = float(cfg["s"])
    run = _sim_config(cfg, eps, coefficient=1.0)
    phi = _test_function(run.mode_cutoff)
    widths = eps * eps * np.array([1.0, 2.0, 5.0, 10.0])
    dec = decompose_increment(run, paths, phi, s, s + widths)
    err = float(np.max(dec.identity_error()))
    yield em.gate("relative gap between six terms and martingale increment",
                  _params(epsilon=eps, s=s, paths=paths.size), err, 0.0, 0.0, 1e-10, "abs")
    norms = dec.l2_norms()
    for m in range(6):
        for w, v in zip(widths, norms[m]):
            yield em.info(f"L2 norm of term {m + 1}", _params(epsilon=eps, s=s, width=float(w)), v)
    for m in (3, 4, 5):
        fit = loglog_slope(widths, norms[m])
        yield em.gate(f"term {m + 1} slope vs t-s", _params(epsilon=eps, s=s, widths="eps^2*{1,2,5,10}"),
                      fit.slope, fit.ci, 0.625, 0.15, "abs")
    eps_list = sorted((e for e in cfg["epsilons"] if e > 0), reverse=True)
    t = float(cfg["t_end"])
    by_eps = []
    for e in eps_list:
        r = _sim_config(cfg, e, coefficient=1.0)
        d = decompose_increment(r, paths, _test_function(r.mode_cutoff), s, [t])
        by_eps.append(d.l2_norms()[:, 0])
        for m in range(6):
            yield em.info(f"L2 norm of term {m + 1}", _params(epsilon=e, s=s, t=t), by_eps[-1][m])
    if len(eps_list) >= 3:
        by_eps = np.array(by_eps)
        for m in (1, 2):
            fit = loglog_slope(eps_list, by_eps[:, m])
            yield em.gate(f"term {m + 1} slope vs epsilon", _params(s=s, t=t), fit.slope, fit.ci, 0.25, 0.1, "abs")


def _sewing_config(cfg, eps: float) -> SimConfig:
    level = max(cfg["level_max"], cfg["sewing_level"], math.ceil(math.log2(10.0 / eps ** 2)))
    return _sim_config(cfg, eps, t_end=1.0, dt=2.0 ** -level, coefficient=1.0)


def suite_sewing_check(cfg) -> Iterator[Row]:
    em = _Emitter("sewing-check")
    L = int(cfg["level_max"])
    paths = _paths(cfg)
    W = sewing.brownian_paths(cfg["seed"], paths, L)
    germ = sewing.ito_germ(W, L)
    exact = (W[:, -1] ** 2 - 1) / 2
    levels = np.arange(2, L + 1)
    errs = np.array([np.sqrt(np.mean((sewing.sew(germ, lev).values[:, -1] - exact) ** 2)) for lev in levels])
    for lev, e in zip(levels, errs):
        yield em.info("Ito germ L2 error", _params(level=int(lev), paths=paths.size), e)
    fit = loglog_slope(2.0 ** levels, errs)
    yield em.gate("Ito germ error slope vs number of intervals", _params(levels=f"2..{L}"),
                  fit.slope, fit.ci, -0.5, 0.1, "abs")

    eps = float(cfg["epsilon"])
    Ls = int(cfg["sewing_level"])
    run = _sewing_config(cfg, eps)
    data = sewing.frozen_germ_data(run, paths, _test_function(run.mode_cutoff), range(1, 10), Ls)
    fg = sewing.frozen_germ(data)
    gap_levels = list(range(max(0, Ls - 6), Ls + 1))
    gaps = sewing.level_gaps(fg, gap_levels)
    for lev, gp in zip(gap_levels[1:], gaps):
        yield em.info("frozen germ level gap", _params(level=lev, epsilon=eps), gp)
    ratio = float(np.exp(np.mean(np.diff(np.log(gaps)))))
    yield em.info("frozen germ mean gap ratio per level", _params(levels=f"{gap_levels[0]}..{Ls}"),
                  ratio, 0.0, 2.0 ** -0.125)
    top = sewing.sew(fg, Ls).values
    below = sewing.sew(fg, Ls - 1).values
    dist = float(np.median(np.abs(top[:, -1] - data.direct[:, -1])))
    bound = float(np.median(np.abs(top[:, -1] - below[:, -1])))
    p = _params(epsilon=eps, level=Ls, dt=run.dt, paths=paths.size)
    yield em.gate("median |sewn - direct Ito sum| vs twice the level gap", p, dist, 0.0, 2 * bound, 0.0, "max")
    for name, cand, want in (("sewn path", top, True), ("direct Ito sum", data.direct, True),
                             ("sewn path plus drift t", top + np.linspace(0, 1, top.shape[1]), False)):
        rep = sewing.characterization_check(cand, fg)
        yield em.info(f"K1 estimate, {name}", p, rep.k1, 0.0, rep.tolerance)
        yield em.info(f"worst mean z-score, {name}", p, rep.worst_mean_z, 0.0, rep.z_threshold)
        yield em.gate(f"characterization verdict matches, {name}", p, float(rep.passed == want), 0.0, 1.0, 0.0, "abs")


HOLDER_TIMES = (0.25, 0.5, 0.75, 1.0)


def suite_holder_norms(cfg) -> Iterator[Row]:
    em = _Emitter("holder-norms")
    paths = _paths(cfg)
    norms = []
    eps_list = sorted((e for e in cfg["epsilons"] if e > 0), reverse=True)
    for eps in eps_list:
        # a step count divisible by 4 puts every save time on the grid
        n_steps = 4 * math.ceil(10.0 / (4 * eps * eps) - 1e-9)
        run = _sim_config(cfg, eps, t_end=1.0, dt=1.0 / n_steps, save_times=HOLDER_TIMES)
        tr = solve_paths(run, paths)
        best = 0.0
        for k, t in enumerate(HOLDER_TIMES):
            grid = spectral.to_grid(tr.u[k], run.grid_size)
            est = holder_seminorm(grid, 0.25, 4)
            yield em.info("Holder seminorm", _params(epsilon=eps, t=t, N=run.grid_size), est.value, est.ci)
            best = max(best, est.norm)
        norms.append(best)
        yield em.info("C^{0,1/4}_4 norm", _params(epsilon=eps, paths=paths.size), best)
    if norms:
        yield em.gate("ratio of largest to smallest norm", _params(epsilons=",".join(map(str, eps_list))),
                      max(norms) / min(norms), 0.0, 2.0, 0.0, "max")
    eps = float(cfg["epsilon"])
    s = float(cfg["s"])
    widths = eps * eps * np.array([1.0, 2.0, 5.0, 10.0])
    run = _sim_config(cfg, eps, t_end=1.0)
    times = tuple(float(round((s + w) / run.dt) * run.dt) for w in np.concatenate([[0.0], widths]))
    run = run.with_(save_times=times)
    tr = solve_paths(run, paths)
    base = spectral.to_grid(tr.u[0], run.grid_size)
    incs = []
    for k, w in enumerate(widths, start=1):
        diff = spectral.to_grid(tr.u[k], run.grid_size) - base
        incs.append(float(np.max(np.mean(diff ** 4, axis=0) ** 0.25)))
        yield em.info("sup_x L4 increment norm", _params(epsilon=eps, s=s, width=float(w)), incs[-1])
    fit = loglog_slope(widths, incs)
    yield em.gate("increment norm slope vs t-s", _params(epsilon=eps, s=s, widths="eps^2*{1,2,5,10}"),
                  fit.slope, fit.ci, 0.10, 0.0, "min")


SUITES: dict[str, Callable[[dict], Iterator[Row]]] = {
    "constants": suite_constants,
    "heat-check": suite_heat_check,
    "blowup-curve": suite_blowup_curve,
    "beta-stats": suite_beta_stats,
    "simulate": suite_simulate,
    "converge": suite_converge,
    "decompose": suite_decompose,
    "sewing-check": suite_sewing_check,
    "holder-norms": suite_holder_norms,
}


def run_suite(name: str, cfg: dict) -> Iterator[Row]:
    if name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}")
    return SUITES[name](cfg)
