"""Closed-form constants and analytic identities, each with an independent oracle."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import spectral

HEAT_NORM_LEADING = 3.0 / (32.0 * np.sqrt(2.0 * np.pi))


def c0() -> float:
    """Variance rate (64 sqrt(pi))^-1 of the iterated integrals beta^{eps,n}."""
    return 1.0 / (64.0 * np.sqrt(np.pi))


def limit_coefficient() -> float:
    """(8 pi^(1/4))^-1, the square root of c0."""
    return 1.0 / (8.0 * np.pi ** 0.25)


def gaussian_x4_integral() -> float:
    """Closed form of the integral of x^4 exp(-8 pi^2 x^2) over the real line."""
    return 3.0 / (512.0 * np.sqrt(2.0) * np.pi ** 4.5)


def gaussian_x4_quadrature() -> float:
    """Adaptive quadrature of the same integral, split at the Gaussian width."""
    f = lambda x: x ** 4 * np.exp(-8 * np.pi ** 2 * x ** 2)
    w = 1.0 / (4 * np.pi)
    total = 0.0
    for a, b in ((0, w), (w, 4 * w), (4 * w, 16 * w), (16 * w, np.inf)):
        val, _ = integrate.quad(f, a, b, epsabs=0, epsrel=1e-13, limit=200)
        total += val
    return 2.0 * total


def gaussian_moment_route() -> float:
    """(3/4) sqrt(pi) a^(-5/2) at a = 8 pi^2, the full-line fourth Gaussian moment."""
    return 0.75 * np.sqrt(np.pi) * (8 * np.pi ** 2) ** -2.5


def c0_gaussian_route() -> float:
    """c0 rebuilt from the Gaussian integral.

    The heat-norm leading constant is (2 pi)^4 times the Gaussian integral,
    and eps^3 times the integral of (2 eps^2 + tau)^(-5/2) over tau > 0 is
    (2/3) 2^(-3/2) for every eps.
    """
    leading = (2 * np.pi) ** 4 * gaussian_x4_integral()
    return leading * (2.0 / 3.0) * 2.0 ** -1.5


def heat_norm_relative_error(t: float) -> float:
    """(direct mode sum) / (leading term) - 1 for ||grad^2 P_t||^2."""
    direct = spectral.heat_deriv_l2norm_sq(2, t)
    return direct / (HEAT_NORM_LEADING * t ** -2.5) - 1.0


def heat_norm_asymptotic_error(t: float) -> float:
    """|direct mode sum - leading term| * t^2."""
    direct = spectral.heat_deriv_l2norm_sq(2, t)
    return abs(direct - HEAT_NORM_LEADING * t ** -2.5) * t ** 2


def variance_blowup(gamma: float, eps: float, kmax: int | None = None) -> float:
    """Variance at time 1 of the Ito pairing of X_eps with (-Lap)^(gamma/2) xi_eps, test function 1.

    Sum over k >= 1 of 2 mu^(2 gamma) exp(-4 mu eps^2) times the exact time
    integral of (1 - exp(-2 mu t)) / (2 mu), mu = (2 pi k)^2.
    """
    if not 0 <= gamma <= 1:
        raise ValueError("gamma must lie in [0, 1]")
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    if kmax is None:
        # exp(-16 pi^2 k^2 eps^2) < 1e-18 beyond this k
        kmax = int(np.ceil(np.sqrt(41.5 / (16 * np.pi ** 2)) / eps)) + 10
    k = np.arange(1, kmax + 1, dtype=float)
    mu = (2 * np.pi * k) ** 2
    time_integral = 1.0 - (1.0 - np.exp(-2 * mu)) / (2 * mu)
    terms = 2 * mu ** (2 * gamma) * np.exp(-4 * mu * eps ** 2) * time_integral / (2 * mu)
    return float(np.sum(terms[::-1]))


def _triple_products(n: int, M: int) -> np.ndarray:
    """T[j, i] = (e_n e_i, e_j) for i, j in 1..M, exact by grid quadrature."""
    N = spectral.min_grid_size(M + n)
    x = np.arange(N) / N
    B = spectral.basis_values(M + n, x)[:, :M]
    en = spectral.basis_values(n, x)[:, n - 1]
    return (B * en[:, None]).T @ B / N


def _gradient_matrix(M: int, eps: float) -> np.ndarray:
    return spectral.gradient(spectral.heat(np.eye(M), eps * eps)).T


def beta_increment_variance(eps: float, n: int, M: int, s: float, t: float,
                            dt: float | None = None, placement: float = 0.5) -> float:
    """Exact Var(beta^{eps,n}_t - beta^{eps,n}_s) for the Galerkin model with M modes.

    With dt given, the variance of the time-stepped scheme (convolution
    evolved by exponential Euler with the given placement) is returned;
    otherwise the continuous-time value. No asymptotics in eps are used, so
    this is the finite-eps target the Monte Carlo estimate should hit.
    """
    G = _gradient_matrix(M, eps)
    A = G @ _triple_products(n, M)
    col = np.sum(A * A, axis=0)  # ||grad P (e_n e_i)||^2 projected
    lam = spectral.eigenvalues(M)
    zrate = np.sum(G * G, axis=1)  # variance per unit time of each mode of Z
    e32 = eps ** 1.5
    if dt is None:
        with np.errstate(divide="ignore", invalid="ignore"):
            two = 2 * lam
            # integral over r in [s, t] of (1 - exp(-2 lam r)) / (2 lam)
            integ = np.where(
                lam > 0,
                ((t - s) - (np.exp(-two * s) - np.exp(-two * t)) / two) / two,
                0.0,
            )
        vx = e32 * zrate * integ
    else:
        i0, i1 = int(round(s / dt)), int(round(t / dt))
        q = np.exp(-2 * lam * dt)
        inj = e32 * zrate * np.exp(-2 * lam * placement * dt) * dt
        # variance after i steps is inj (1 - q^i)/(1 - q); sum over i0 <= i < i1
        with np.errstate(divide="ignore", invalid="ignore"):
            geo = np.where(q < 1, (q ** i0 - q ** i1) / (1 - q), 0.0)
            stat = np.where(q < 1, inj / (1 - q), 0.0)
        vx = stat * ((i1 - i0) - geo) * dt
    return float(e32 * np.sum(col * vx))


def convolution_point_variance(eps: float, t: float, M: int | None = None) -> float:
    """Var X_t(x) for X = J[1], independent of x by translation invariance."""
    if M is None:
        M = 2 * int(np.ceil(6.0 / eps)) + 1
    G = _gradient_matrix(M, eps)
    lam = spectral.eigenvalues(M)
    zrate = np.sum(G * G, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        growth = np.where(lam > 0, (1 - np.exp(-2 * lam * t)) / (2 * lam), 0.0)
    # a sin/cos pair of equal variance v contributes v (sin^2 + cos^2) * 2 = 2v, one v per mode
    return float(eps ** 1.5 * np.sum(zrate * growth))


@dataclass(frozen=True)
class ConstantReport:
    name: str
    closed_form: float
    oracle: float
    tolerance: float

    @property
    def relative_difference(self) -> float:
        return abs(self.closed_form - self.oracle) / abs(self.oracle)

    @property
    def passed(self) -> bool:
        return self.relative_difference <= self.tolerance


def constant_report() -> list[ConstantReport]:
    t_probe = 1e-4
    return [
        ConstantReport("c0 vs limit coefficient squared", c0(), limit_coefficient() ** 2, 1e-15),
        ConstantReport("c0 vs heat-norm route", c0(), c0_gaussian_route(), 1e-14),
        ConstantReport("gaussian x^4 integral vs quadrature", gaussian_x4_integral(),
                       gaussian_x4_quadrature(), 1e-12),
        ConstantReport("gaussian x^4 integral vs moment formula", gaussian_x4_integral(),
                       gaussian_moment_route(), 1e-14),
        ConstantReport("heat norm leading term at t=1e-4", HEAT_NORM_LEADING * t_probe ** -2.5,
                       spectral.heat_deriv_l2norm_sq(2, t_probe), 0.02),
    ]
