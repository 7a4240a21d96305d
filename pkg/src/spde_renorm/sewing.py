"""Dyadic sewing of two-parameter germs and the uniqueness checks that go with it.

All path data live on the dyadic grid t_i = i 2^-L_max of [0, 1]; a germ is
evaluated on index pairs of that grid, vectorized over Monte Carlo paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from . import spectral
from .config import SimConfig
from .noise import standard_normals
from .solver import PathEnsemble


@dataclass
class Germ:
    """A_{s,t} on pairs of grid indices; ``evaluate(i, j)`` returns shape (paths, len(i))."""

    evaluate: Callable[[np.ndarray, np.ndarray], np.ndarray]
    level_max: int
    beta1: float = 0.625
    beta2: float = np.inf
    gamma1: float = np.nan
    gamma2: float = 0.0
    martingale: bool = False

    def __call__(self, i, j) -> np.ndarray:
        i = np.atleast_1d(np.asarray(i, dtype=np.int64))
        j = np.atleast_1d(np.asarray(j, dtype=np.int64))
        if np.any(i > j) or np.any(i < 0) or np.any(j > (1 << self.level_max)):
            bad = int(np.argmax((i > j) | (i < 0) | (j > (1 << self.level_max))))
            raise ValueError(f"germ cannot be evaluated on interval index ({i[bad]}, {j[bad]})")
        return self.evaluate(i, j)


@dataclass
class SewnPath:
    level: int
    times: np.ndarray
    values: np.ndarray  # (paths, 2^level + 1), values[:, 0] = 0


def sew(germ: Germ, level: int) -> SewnPath:
    """Riemann sums of the germ over the level-``level`` dyadic partition."""
    if not 0 <= level <= germ.level_max:
        raise ValueError(f"level must lie in [0, {germ.level_max}]")
    stride = 1 << (germ.level_max - level)
    i = np.arange(1 << level) * stride
    pieces = germ(i, i + stride)
    values = np.concatenate([np.zeros((pieces.shape[0], 1)), np.cumsum(pieces, axis=1)], axis=1)
    return SewnPath(level, np.linspace(0.0, 1.0, (1 << level) + 1), values)


def additive_germ(h: np.ndarray, level_max: int) -> Germ:
    h = np.atleast_2d(h)
    return Germ(lambda i, j: h[:, j] - h[:, i], level_max, beta1=1.0)


def power_germ(beta1: float, level_max: int, n_paths: int = 1) -> Germ:
    scale = 2.0 ** -level_max
    return Germ(lambda i, j: np.tile(((j - i) * scale) ** beta1, (n_paths, 1)), level_max,
                beta1=beta1)


def brownian_paths(seed: int, paths, level_max: int) -> np.ndarray:
    """Brownian motion samples on the level-``level_max`` dyadic grid, shape (paths, 2^L + 1)."""
    n = 1 << level_max
    z = standard_normals(seed, paths, 0, n, 1)[..., 0] * np.sqrt(1.0 / n)
    return np.concatenate([np.zeros((z.shape[0], 1)), np.cumsum(z, axis=1)], axis=1)


def ito_germ(W: np.ndarray, level_max: int) -> Germ:
    """A_{s,t} = W_s (W_t - W_s)."""
    return Germ(lambda i, j: W[:, i] * (W[:, j] - W[:, i]), level_max, beta1=1.0, martingale=True)


@dataclass
class FrozenGermData:
    """Channels of the frozen germ on the dyadic grid.

    ``coeffs[p, i, n]`` is (g'g(u_{t_i}) e_n, phi), ``beta[p, i, n]`` the iterated
    integrals, and ``direct[p, i]`` the running Ito sum over every solver step
    of the unfrozen integrand.
    """

    level_max: int
    modes: tuple
    coeffs: np.ndarray
    beta: np.ndarray
    direct: np.ndarray


def frozen_germ_data(cfg: SimConfig, paths, phi: np.ndarray, modes, level_max: int) -> FrozenGermData:
    """Run the mollified equation with beta channels and record the germ ingredients."""
    n_steps = cfg.n_steps
    if abs(cfg.t_end - 1.0) > 1e-12:
        raise ValueError("sewing runs on [0, 1]")
    stride = n_steps >> level_max
    if stride < 1 or stride << level_max != n_steps:
        raise ValueError("the step count must be a power-of-two multiple of 2^level_max")
    ens = PathEnsemble(cfg, paths, beta_modes=modes)
    modes = ens.beta_modes
    N, g = cfg.grid_size, cfg.nonlinearity
    phi_grid = spectral.to_grid(np.asarray(phi, dtype=float), N)
    idx = np.asarray(modes) - 1
    P = ens.paths.size
    T = (1 << level_max) + 1
    coeffs = np.empty((P, T, len(modes)))
    beta = np.empty((P, T, len(modes)))
    direct = np.empty((P, T))
    running = np.zeros(P)

    def integrand(u):
        return spectral.from_grid(g.gdg(spectral.to_grid(u, N)) * phi_grid, max(modes))[:, idx]

    for step in range(n_steps + 1):
        if step % stride == 0:
            k = step // stride
            coeffs[:, k] = integrand(ens.u)
            beta[:, k] = ens.beta
            direct[:, k] = running
        if step == n_steps:
            break
        c = integrand(ens.u) if step % stride else coeffs[:, step // stride]
        before = ens.beta.copy()
        ens.advance()
        running = running + np.sum(c * (ens.beta - before), axis=1)
    return FrozenGermData(level_max, modes, coeffs, beta, direct)


def frozen_germ(data: FrozenGermData) -> Germ:
    """A_{s,t} = sum_n (g'g(u_s) e_n, phi) (beta^n_t - beta^n_s), a martingale germ."""
    C, B = data.coeffs, data.beta

    def evaluate(i, j):
        return np.einsum("pkn,pkn->pk", C[:, i], B[:, j] - B[:, i])

    return Germ(evaluate, data.level_max, beta1=0.625, gamma2=0.0, martingale=True)


def level_gaps(germ: Germ, levels) -> np.ndarray:
    """RMS over paths of the terminal-value change between consecutive levels."""
    finals = {L: sew(germ, L).values[:, -1] for L in levels}
    levels = sorted(levels)
    return np.array([np.sqrt(np.mean((finals[b] - finals[a]) ** 2))
                     for a, b in zip(levels[:-1], levels[1:])])


@dataclass
class CharacterizationReport:
    k1_by_level: np.ndarray
    k1: float
    tolerance: float
    worst_mean_z: float
    z_threshold: float
    mean_channel_checked: bool
    passed: bool


def characterization_check(candidate: np.ndarray, germ: Germ, tolerance: float | None = None,
                           level: int | None = None, false_alarm: float = 0.01) -> CharacterizationReport:
    """Check ||A_t - A_s - A_{s,t}||_{L2} <= K1 |t - s|^beta1 on dyadic pairs, plus mean zero.

    ``candidate`` holds the process on the level-``level`` grid, shape
    (paths, 2^level + 1). For each dyadic level up to ``level`` the largest
    ratio over consecutive pairs is recorded. The check passes when the
    largest ratio stays below ``tolerance`` (default: twice the germ's own L2
    size on [0, 1]) and, for martingale germs, every remainder has a Monte
    Carlo mean compatible with zero. The mean test is Bonferroni-corrected
    over all probed pairs at family-wise level ``false_alarm``.
    """
    cand = np.atleast_2d(candidate)
    if level is None:
        level = int(round(np.log2(cand.shape[1] - 1)))
    if (1 << level) + 1 != cand.shape[1]:
        raise ValueError("candidate must live on a dyadic grid")
    shift = germ.level_max - level
    if shift < 0:
        raise ValueError("germ grid coarser than the candidate")
    n_paths = cand.shape[0]
    if tolerance is None:
        a01 = germ(np.array([0]), np.array([1 << germ.level_max]))[:, 0]
        tolerance = 2.0 * float(np.sqrt(np.mean(a01 ** 2)))
    k1_levels = []
    worst_z = 0.0
    for lev in range(level + 1):
        step = 1 << (level - lev)
        i = np.arange(1 << lev) * step
        j = i + step
        rem = cand[:, j] - cand[:, i] - germ(i << shift, j << shift)
        width = step / (1 << level)
        k1_levels.append(float(np.max(np.sqrt(np.mean(rem ** 2, axis=0)))) / width ** germ.beta1)
        if germ.martingale:
            se = rem.std(axis=0, ddof=1) / np.sqrt(n_paths)
            mean = np.abs(rem.mean(axis=0))
            z = np.where(se > 0, mean / np.maximum(se, 1e-300), np.where(mean > 1e-12, np.inf, 0.0))
            worst_z = max(worst_z, float(np.max(z)))
    k1 = float(np.max(k1_levels))
    n_pairs = (1 << (level + 1)) - 1
    z_max = float(stats.t.isf(false_alarm / (2 * n_pairs), n_paths - 1))
    passed = bool(np.isfinite(k1) and k1 <= tolerance and (not germ.martingale or worst_z <= z_max))
    return CharacterizationReport(np.array(k1_levels), k1, float(tolerance), worst_z, z_max,
                                  germ.martingale, passed)
