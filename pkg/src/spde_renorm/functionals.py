"""Stochastic integrals on a shared noise path: X, J, K, beta, G, the martingale and its six-term split.

Functionals that need every time step re-run the simulation for the
requested paths. The noise is a pure function of (seed, path, step), so a
replay sees exactly the increments of the original run.

Notation on the step grid r = s, s + dt, ..., t - dt (left points):

    K_{s,t}[f]    = sum_r eps^(3/4) (f_r, Z_r)
    J_{s,t}[f]    = recursion Y <- P_dt Y + eps^(3/4) * placed projection of f_r Z_r
    X             = J_{0,.}[1]
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .config import PLACEMENTS, NonlinearitySpec, SimConfig
from .noise import BrownianIncrements, noise_field_coeffs
from .solver import PathEnsemble, StepOperator
from .spectral import SpectralField

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
GL_NODES = 0.5 * (_GL_NODES + 1.0)
GL_WEIGHTS = 0.5 * _GL_WEIGHTS


def evolve_convolution(X: SpectralField, inc: BrownianIncrements, eps: float, dt: float,
                       placement: str = "half") -> SpectralField:
    """One exponential-Euler step of X = J[1]."""
    M = X.mode_cutoff
    if inc.mode_cutoff != M:
        raise ValueError("mode cutoff mismatch")
    z = noise_field_coeffs(inc.dw, eps)
    place = spectral.heat_multiplier(M, PLACEMENTS[placement] * dt)
    return SpectralField(spectral.heat(X.coeffs, dt) + eps ** 0.75 * place * z)


def beta_increments(X: SpectralField, inc: BrownianIncrements, eps: float, modes) -> np.ndarray:
    """eps^(3/4) sum_m (grad P_{eps^2}(e_n X), e_m) dw_m for each listed n, at the left point X."""
    M = X.mode_cutoff
    if inc.mode_cutoff != M:
        raise ValueError("mode cutoff mismatch")
    N = spectral.min_grid_size(M + max(modes))
    prod = spectral.to_grid(X.coeffs, N) * spectral.to_grid(noise_field_coeffs(inc.dw, eps), N)
    low = spectral.from_grid(prod, max(modes))
    return eps ** 0.75 * low[np.asarray(modes) - 1]


def averaged_derivative(u_r: np.ndarray, pu_s: np.ndarray, g: NonlinearitySpec) -> np.ndarray:
    """Integral over theta in [0, 1] of g'(theta u_r + (1 - theta) pu_s), 16-node Gauss-Legendre."""
    u_r = np.asarray(u_r, dtype=float)
    pu_s = np.asarray(pu_s, dtype=float)
    out = np.zeros(np.broadcast(u_r, pu_s).shape)
    for th, w in zip(GL_NODES, GL_WEIGHTS):
        out += w * g.dg(th * u_r + (1.0 - th) * pu_s)
    return out


def _check_window(cfg: SimConfig, s: float, t: float):
    if not 0 <= s <= t <= cfg.t_end + 1e-12:
        raise ValueError(f"need 0 <= s <= t <= t_end, got s={s}, t={t}")
    return cfg.step_of(s), cfg.step_of(t)


def _replay(cfg: SimConfig, paths, until: int, *, solve_u=True, track_x=False, beta_modes=()):
    ens = PathEnsemble(cfg, paths, solve_u=solve_u, track_x=track_x, beta_modes=beta_modes)
    while ens.step_index < until:
        yield ens, ens.advance()


def k_integral(cfg: SimConfig, paths, integrand, s: float, t: float, *, track_x=False) -> np.ndarray:
    """K_{s,t}[f] per path; ``integrand(step_data)`` returns f_r on the grid."""
    i_s, i_t = _check_window(cfg, s, t)
    total = np.zeros(np.atleast_1d(paths).size)
    op = StepOperator(cfg)
    for _, data in _replay(cfg, paths, i_t, track_x=track_x):
        if data.step >= i_s:
            total += op.k_increment(integrand(data), data.z_grid)
    return total


def j_integral(cfg: SimConfig, paths, integrand, s: float, t: float, *, track_x=False) -> np.ndarray:
    """J_{s,t}[f] per path as coefficient rows."""
    i_s, i_t = _check_window(cfg, s, t)
    op = StepOperator(cfg)
    Y = np.zeros((np.atleast_1d(paths).size, cfg.mode_cutoff))
    for _, data in _replay(cfg, paths, i_t, track_x=track_x):
        if data.step >= i_s:
            Y = op.heat_step * Y + op.j_increment(integrand(data), data.z_grid)
    return Y


def martingale_increment(cfg: SimConfig, paths, phi: np.ndarray, s: float, t: float,
                         rule: str = "scheme") -> np.ndarray:
    """M_t(phi) - M_s(phi) with M_t(phi) = (u_t, phi) - (psi, phi) - int_0^t (u_r, Lap phi) dr.

    ``rule="scheme"`` integrates the drift exactly along each step, which
    makes the result equal K_{s,t}[phi g(u)] up to rounding. ``rule="trapezoid"``
    uses the trapezoid rule on the step grid.
    """
    i_s, i_t = _check_window(cfg, s, t)
    if cfg.dt > (t - s) / 10 + 1e-15:
        raise ValueError("insufficient resolution: need dt <= (t - s)/10")
    if cfg.is_limit or cfg.coefficient != 1.0:
        raise ValueError("the identity with K holds for the mollified equation with coefficient 1")
    M = cfg.mode_cutoff
    phi = np.asarray(phi, dtype=float)
    lam = spectral.eigenvalues(M)
    theta = PLACEMENTS[cfg.placement]
    # pairing the placed increment with P_{-theta dt} phi undoes the placement exactly
    phi_back = phi * np.exp(lam * theta * cfg.dt)
    lap_phi = -lam * phi
    heat_step = spectral.heat_multiplier(M, cfg.dt)
    total = np.zeros(np.atleast_1d(paths).size)
    ens = None
    for ens, data in _replay(cfg, paths, i_t):
        if data.step < i_s:
            continue
        if rule == "scheme":
            total += (ens.u - heat_step * data.u) @ phi_back
        elif rule == "trapezoid":
            total += (ens.u - data.u) @ phi - 0.5 * cfg.dt * (data.u @ lap_phi + ens.u @ lap_phi)
        else:
            raise ValueError(f"unknown drift rule {rule!r}")
    return total


@dataclass
class Decomposition:
    """The six terms K^1..K^6 of the martingale increment, per checkpoint and path.

    ``terms`` has shape (6, len(t_values), paths); ``total`` is K_{s,t}[phi g(u)]
    accumulated directly and ``martingale`` is M_t(phi) - M_s(phi).
    """

    s: float
    t_values: np.ndarray
    terms: np.ndarray
    total: np.ndarray
    martingale: np.ndarray

    def identity_error(self) -> np.ndarray:
        """Relative pathwise gap between the sum of the six terms and the martingale increment."""
        summed = self.terms.sum(axis=0)
        scale = np.maximum(np.abs(self.martingale), np.abs(self.terms).sum(axis=0))
        return np.abs(summed - self.martingale) / scale

    def l2_norms(self) -> np.ndarray:
        return np.sqrt(np.mean(self.terms ** 2, axis=-1))


def decompose_increment(cfg: SimConfig, paths, phi: np.ndarray, s: float, t_values) -> Decomposition:
    """Split M_t(phi) - M_s(phi) = K_{s,t}[phi g(u)] into six terms.

    With a_r = P_{r-s} u_s (the frozen heat flow) the integrands are
        1: phi g'g(a) X                     2: phi g(a)
        3: -phi g'g(a) P_{r-s} X_s          4: phi g'(a) (J_{s,r}[g(a)] - g(a) J_{s,r}[1])
        5: phi g'(a) J_{s,r}[g(u) - g(a)]   6: phi (G_{s,r}[u] - g'(a)) J_{s,r}[g(u)]
    and they add up to phi g(u_r) pointwise because J_{s,r}[g(u)] = u_r - a_r.
    """
    if cfg.is_limit or cfg.coefficient != 1.0:
        raise ValueError("the decomposition is defined for the mollified equation with coefficient 1")
    t_values = np.atleast_1d(np.asarray(t_values, dtype=float))
    i_s = cfg.step_of(s)
    stops = [cfg.step_of(t) for t in t_values]
    if min(stops) <= i_s or list(stops) != sorted(stops):
        raise ValueError("checkpoints must be increasing and after s")
    op = StepOperator(cfg)
    g = cfg.nonlinearity
    M, N = cfg.mode_cutoff, cfg.grid_size
    P = np.atleast_1d(paths).size
    phi = np.asarray(phi, dtype=float)
    phi_grid = spectral.to_grid(phi, N)
    lam = spectral.eigenvalues(M)
    phi_back = phi * np.exp(lam * PLACEMENTS[cfg.placement] * cfg.dt)
    heat_step = op.heat_step

    terms = np.zeros((6, len(stops), P))
    total = np.zeros((len(stops), P))
    mart = np.zeros((len(stops), P))
    acc = np.zeros((6, P))
    acc_total = np.zeros(P)
    acc_mart = np.zeros(P)
    slot = 0
    a = px = j_frozen = j_one = j_diff = None
    for ens, d in _replay(cfg, paths, stops[-1], track_x=True):
        if d.step < i_s:
            continue
        if d.step == i_s:
            a = d.u.copy()
            px = d.x.copy()
            j_frozen = np.zeros((P, M))
            j_one = np.zeros((P, M))
            j_diff = np.zeros((P, M))
        ag = spectral.to_grid(a, N)
        ug = d.u_grid
        g_a, dg_a, g_u = g.g(ag), g.dg(ag), g.g(ug)
        gdg_a = g_a * dg_a
        big_g = averaged_derivative(ug, ag, g)
        j_frozen_g = spectral.to_grid(j_frozen, N)
        j_one_g = spectral.to_grid(j_one, N)
        j_diff_g = spectral.to_grid(j_diff, N)
        integrands = (
            gdg_a * d.x_grid,
            g_a,
            -gdg_a * spectral.to_grid(px, N),
            dg_a * (j_frozen_g - g_a * j_one_g),
            dg_a * j_diff_g,
            (big_g - dg_a) * (ug - ag),
        )
        for m, f in enumerate(integrands):
            acc[m] += op.k_increment(phi_grid * f, d.z_grid)
        acc_total += op.k_increment(phi_grid * g_u, d.z_grid)
        acc_mart += (ens.u - heat_step * d.u) @ phi_back
        # advance the frozen channels to r + dt
        j_frozen = heat_step * j_frozen + op.j_increment(g_a, d.z_grid)
        j_diff = heat_step * j_diff + op.j_increment(g_u - g_a, d.z_grid)
        j_one = heat_step * j_one + op.noise_scale * op.placement * d.z_coeffs
        a = heat_step * a
        px = heat_step * px
        while slot < len(stops) and stops[slot] == d.step + 1:
            terms[:, slot] = acc
            total[slot] = acc_total
            mart[slot] = acc_mart
            slot += 1
    return Decomposition(s, t_values, terms, total, mart)
