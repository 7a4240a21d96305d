"""Exponential-Euler stepping for the mollified equation and the limit equation.

Mollified:  du = Lap u dt + coefficient * eps^(3/4) g(u) grad xi_eps
Limit:      du = Lap u dt + coefficient * g'g(u) xi

Both are written in mild form on e_1..e_M. With increments dw_m of the
cylindrical Brownian motion, the stochastic part of one step for mode j is

    mollified:  eps^(3/4) sum_m (grad P_{eps^2}(e_j g(u)), e_m) dw_m
                = eps^(3/4) (e_j, g(u) Z),   Z = -grad P_{eps^2} sum_m dw_m e_m
    limit:      (e_j, g'g(u) W),             W = sum_m dw_m e_m

so each step is one grid product with a noise field followed by a
projection. The increment is damped by exp(-lambda theta dt), theta set by
the semigroup placement. g(u) is always taken at the left end of the step.

All arrays carry a leading path axis, so a block of Monte Carlo paths is
advanced with a handful of FFTs per step.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .config import PLACEMENTS, SimConfig
from .noise import IncrementSource, RngStream, noise_field_coeffs
from .spectral import SpectralField

WORKERS_ENV = "SPDE_RENORM_WORKERS"
PATH_BLOCK = 512


class StepOperator:
    """Precomputed multipliers for one configuration."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        self.M = cfg.mode_cutoff
        self.N = cfg.grid_size
        self.dt = cfg.dt
        self.eps = cfg.epsilon
        self.heat_step = spectral.heat_multiplier(self.M, cfg.dt)
        self.placement = spectral.heat_multiplier(self.M, PLACEMENTS[cfg.placement] * cfg.dt)
        # eps^(3/4) for the noise objects X, beta, J, K; the solver multiplies by the coefficient too
        self.noise_scale = self.eps ** 0.75 if self.eps > 0 else 1.0
        self.u_scale = cfg.coefficient * self.noise_scale

    def noise_coeffs(self, dw: np.ndarray) -> np.ndarray:
        if self.eps > 0:
            return noise_field_coeffs(dw, self.eps)
        return dw

    def to_grid(self, coeffs: np.ndarray) -> np.ndarray:
        return spectral.to_grid(coeffs, self.N)

    def j_increment(self, f_grid: np.ndarray, z_grid: np.ndarray) -> np.ndarray:
        """One step of J[f]: eps^(3/4) times the placed projection of f Z."""
        return self.noise_scale * self.placement * spectral.from_grid(f_grid * z_grid, self.M)

    def k_increment(self, f_grid: np.ndarray, z_grid: np.ndarray) -> np.ndarray:
        """One step of K[f]: eps^(3/4) (f, Z), the grid mean being exact for band-limited Z."""
        return self.noise_scale * np.mean(f_grid * z_grid, axis=-1)

    def u_increment(self, u_grid: np.ndarray, z_grid: np.ndarray) -> np.ndarray:
        g = self.cfg.nonlinearity
        coef = g.gdg(u_grid) if self.eps == 0 else g.g(u_grid)
        return self.u_scale * self.placement * spectral.from_grid(coef * z_grid, self.M)


@dataclass
class StepData:
    """Left-point quantities of the step that was just taken."""

    step: int
    t: float
    dw: np.ndarray
    z_coeffs: np.ndarray
    z_grid: np.ndarray
    u: np.ndarray | None
    u_grid: np.ndarray | None
    x: np.ndarray | None
    x_grid: np.ndarray | None


class PathEnsemble:
    """Joint state of u, the convolution X and the iterated integrals beta for a block of paths."""

    def __init__(self, cfg: SimConfig, paths, *, solve_u: bool = True, track_x: bool = False,
                 beta_modes=()):
        self.cfg = cfg
        self.op = StepOperator(cfg)
        self.paths = np.atleast_1d(np.asarray(paths, dtype=np.int64))
        P, M = self.paths.size, cfg.mode_cutoff
        self.source = IncrementSource(cfg.seed, self.paths, M, cfg.dt)
        self.step_index = 0
        self.solve_u = solve_u
        self.beta_modes = tuple(int(n) for n in beta_modes)
        if self.beta_modes and cfg.is_limit:
            raise ValueError("beta channels need epsilon > 0")
        self.track_x = track_x or bool(self.beta_modes)
        psi = cfg.initial.coefficients(M)
        self.u = np.tile(psi, (P, 1)) if solve_u else None
        self.x = np.zeros((P, M)) if self.track_x else None
        self.beta = np.zeros((P, len(self.beta_modes)))
        self._beta_max = max(self.beta_modes) if self.beta_modes else 0

    @property
    def t(self) -> float:
        return self.step_index * self.cfg.dt

    def advance(self) -> StepData:
        op = self.op
        dw = self.source(self.step_index)
        z = op.noise_coeffs(dw)
        zg = op.to_grid(z)
        ug = xg = None
        u_left, x_left = self.u, self.x
        if self.solve_u:
            ug = op.to_grid(self.u)
            self.u = op.heat_step * self.u + op.u_increment(ug, zg)
        if self.track_x:
            xg = op.to_grid(self.x)
            if self.beta_modes:
                prod = spectral.from_grid(xg * zg, max(self._beta_max, 1))
                idx = np.asarray(self.beta_modes) - 1
                self.beta = self.beta + op.noise_scale * prod[:, idx]
            self.x = op.heat_step * self.x + op.noise_scale * op.placement * z
        data = StepData(self.step_index, self.t, dw, z, zg, u_left, ug, x_left, xg)
        self.step_index += 1
        return data


@dataclass
class BetaPaths:
    """beta^{eps,n} for the listed modes: values[time, path, mode]."""

    modes: tuple
    times: np.ndarray
    values: np.ndarray

    def increments(self, s: float, t: float) -> np.ndarray:
        i, j = (int(np.argmin(np.abs(self.times - v))) for v in (s, t))
        return self.values[j] - self.values[i]


@dataclass
class Trajectory:
    cfg: SimConfig
    paths: np.ndarray
    times: np.ndarray
    u: np.ndarray | None
    x: np.ndarray | None = None
    beta: BetaPaths | None = None
    meta: dict = field(default_factory=dict)

    def field(self, time_index: int, path: int = 0) -> SpectralField:
        return SpectralField(self.u[time_index, path])

    def time_index(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9:
            raise KeyError(f"time {t} was not recorded")
        return i

    def u_at(self, t: float) -> np.ndarray:
        return self.u[self.time_index(t)]


def _record_times(cfg: SimConfig):
    times = cfg.save_times or (cfg.t_end,)
    return np.array(times), [cfg.step_of(t) for t in times]


def _solve_block(cfg: SimConfig, paths, solve_u: bool, track_x: bool, beta_modes) -> Trajectory:
    ens = PathEnsemble(cfg, paths, solve_u=solve_u, track_x=track_x, beta_modes=beta_modes)
    times, steps = _record_times(cfg)
    P, M = ens.paths.size, cfg.mode_cutoff
    us = np.empty((len(times), P, M)) if solve_u else None
    xs = np.empty((len(times), P, M)) if ens.track_x else None
    bs = np.empty((len(times), P, len(ens.beta_modes)))
    slot = 0
    for step in range(cfg.n_steps + 1):
        while slot < len(steps) and steps[slot] == step:
            if solve_u:
                us[slot] = ens.u
            if xs is not None:
                xs[slot] = ens.x
            bs[slot] = ens.beta
            slot += 1
        if slot == len(steps):
            break
        ens.advance()
    beta = BetaPaths(ens.beta_modes, times, bs) if ens.beta_modes else None
    return Trajectory(cfg, ens.paths, times, us, xs, beta)


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "")
    if raw.strip():
        return max(1, int(raw))
    return os.cpu_count() or 1


def solve_paths(cfg: SimConfig, paths, *, solve_u: bool = True, track_x: bool = False,
                beta_modes=(), workers: int | None = None) -> Trajectory:
    """Simulate the listed path indices and record every channel at cfg.save_times.

    Paths are processed in fixed blocks; the result is concatenated in path
    order, so neither the block size nor the worker count changes any number.
    """
    paths = np.atleast_1d(np.asarray(paths, dtype=np.int64))
    blocks = [paths[i:i + PATH_BLOCK] for i in range(0, paths.size, PATH_BLOCK)]
    workers = worker_count() if workers is None else workers
    args = [(cfg, b, solve_u, track_x, tuple(beta_modes)) for b in blocks]
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(blocks))) as pool:
            parts = list(pool.map(_solve_block, *zip(*args)))
    else:
        parts = [_solve_block(*a) for a in args]
    cat = lambda name: None if getattr(parts[0], name) is None else np.concatenate(
        [getattr(p, name) for p in parts], axis=1)
    beta = None
    if parts[0].beta is not None:
        beta = BetaPaths(parts[0].beta.modes, parts[0].beta.times,
                         np.concatenate([p.beta.values for p in parts], axis=1))
    meta = {"config_hash": cfg.config_hash(), "seed": cfg.seed}
    return Trajectory(cfg, paths, parts[0].times, cat("u"), cat("x"), beta, meta)


def solve_path(cfg: SimConfig, stream: RngStream) -> Trajectory:
    """Single-path driver; the stream's seed overrides cfg.seed."""
    if stream.step_counter != 0:
        raise ValueError("a trajectory starts at step 0")
    run_cfg = cfg if stream.master_seed == cfg.seed else cfg.with_(seed=stream.master_seed)
    return solve_paths(run_cfg, [stream.path_index], workers=1)


def _single_step(u: SpectralField, dw: np.ndarray, cfg: SimConfig) -> SpectralField:
    op = StepOperator(cfg)
    if dw.shape[-1] != cfg.mode_cutoff or u.mode_cutoff != cfg.mode_cutoff:
        raise ValueError("mode cutoff mismatch")
    zg = op.to_grid(op.noise_coeffs(dw))
    ug = op.to_grid(u.coeffs)
    return SpectralField(op.heat_step * u.coeffs + op.u_increment(ug, zg))


def step_mollified(u: SpectralField, inc, cfg: SimConfig) -> SpectralField:
    if cfg.is_limit:
        raise ValueError("step_mollified needs epsilon > 0")
    return _single_step(u, inc.dw, cfg)


def step_limit(u: SpectralField, inc, cfg: SimConfig) -> SpectralField:
    if not cfg.is_limit:
        raise ValueError("step_limit needs epsilon = 0")
    return _single_step(u, inc.dw, cfg)
