"""Spectral calculus on the unit torus in the real sine/cosine basis.

Coefficient arrays are indexed so that position ``n - 1`` holds the
coefficient of ``e_n``:

    e_1 = 1,  e_{2k} = sqrt(2) sin(2 pi k x),  e_{2k+1} = sqrt(2) cos(2 pi k x).

Every array function accepts leading batch axes (for example one row per
Monte Carlo path); the last axis is always the mode axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft

SQRT2 = np.sqrt(2.0)
TWO_PI = 2.0 * np.pi


def wavenumbers(M: int) -> np.ndarray:
    """Integer wavenumber k(n) = floor(n/2) for n = 1..M."""
    return np.arange(1, M + 1) // 2


def eigenvalues(M: int) -> np.ndarray:
    """Eigenvalues (2 pi k(n))^2 of minus the Laplacian."""
    return (TWO_PI * wavenumbers(M)) ** 2


def min_grid_size(M: int) -> int:
    """Smallest power of two that is at least 2M + 2."""
    return 1 << int(np.ceil(np.log2(2 * M + 2)))


def default_grid_size(M: int) -> int:
    """Power of two at least 4M, leaving room for products of fields."""
    return max(min_grid_size(M), 1 << int(np.ceil(np.log2(4 * M))))


def heat_multiplier(M: int, t: float) -> np.ndarray:
    if t < 0:
        raise ValueError(f"heat flow needs t >= 0, got {t}")
    return np.exp(-eigenvalues(M) * t)


def heat(coeffs: np.ndarray, t: float) -> np.ndarray:
    return coeffs * heat_multiplier(coeffs.shape[-1], t)


def gradient(coeffs: np.ndarray) -> np.ndarray:
    """Exact derivative, truncated to the same M modes.

    d/dx of a sin mode gives 2 pi k times the cos partner, and a cos mode
    gives -2 pi k times the sin partner.
    """
    M = coeffs.shape[-1]
    out = np.zeros_like(coeffs)
    k = np.arange(1, (M - 1) // 2 + 1)
    # a trailing sin mode (M even) has no cos partner and its derivative is dropped
    out[..., 2::2] = TWO_PI * k * coeffs[..., 1::2][..., : k.size]
    out[..., 1:2 * k.size:2] = -TWO_PI * k * coeffs[..., 2::2]
    return out


def fractional_laplacian(coeffs: np.ndarray, gamma: float) -> np.ndarray:
    """Apply (-Laplacian)^(gamma/2); the constant mode is killed for gamma > 0."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    lam = eigenvalues(coeffs.shape[-1])
    if gamma == 0:
        return coeffs.copy()
    return coeffs * lam ** (gamma / 2.0)


def to_grid(coeffs: np.ndarray, N: int) -> np.ndarray:
    """Sample the field at x_j = j/N."""
    M = coeffs.shape[-1]
    if M // 2 >= N // 2:
        raise ValueError(f"grid of {N} points cannot resolve {M} modes")
    spec = np.zeros(coeffs.shape[:-1] + (N // 2 + 1,), dtype=complex)
    spec[..., 0] = coeffs[..., 0] * N
    scale = N / SQRT2
    n_sin = M // 2
    n_cos = (M - 1) // 2
    spec[..., 1:n_sin + 1] -= 1j * scale * coeffs[..., 1::2][..., :n_sin]
    spec[..., 1:n_cos + 1] += scale * coeffs[..., 2::2][..., :n_cos]
    return fft.irfft(spec, n=N, axis=-1)


def from_grid(values: np.ndarray, M: int) -> np.ndarray:
    """Discrete projection of grid samples onto e_1..e_M."""
    N = values.shape[-1]
    if M // 2 >= N // 2:
        raise ValueError(f"cutoff {M} too large for a grid of {N} points")
    spec = fft.rfft(values, axis=-1)
    out = np.empty(values.shape[:-1] + (M,))
    out[..., 0] = spec[..., 0].real / N
    scale = SQRT2 / N
    n_sin = M // 2
    n_cos = (M - 1) // 2
    out[..., 1::2] = -scale * spec[..., 1:n_sin + 1].imag
    out[..., 2::2] = scale * spec[..., 1:n_cos + 1].real
    return out


def basis_values(M: int, x) -> np.ndarray:
    """Matrix of e_n(x) with shape (len(x), M)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    k = wavenumbers(M)
    out = np.empty((x.size, M))
    out[:, 0] = 1.0
    arg = TWO_PI * np.outer(x, k[1:])
    is_sin = (np.arange(2, M + 1) % 2) == 0
    out[:, 1:] = np.where(is_sin, SQRT2 * np.sin(arg), SQRT2 * np.cos(arg))
    return out


def evaluate(coeffs: np.ndarray, x) -> np.ndarray:
    """Pointwise synthesis sum_n c_n e_n(x), broadcasting over batch axes."""
    return coeffs @ basis_values(coeffs.shape[-1], x).T


@dataclass(frozen=True)
class SpectralField:
    """Real field stored as coefficients on e_1..e_M."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size < 1:
            raise ValueError("coefficients must be a nonempty 1-d array")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def mode_cutoff(self) -> int:
        return self.coeffs.size

    @classmethod
    def unit(cls, n: int, M: int) -> "SpectralField":
        c = np.zeros(M)
        c[n - 1] = 1.0
        return cls(c)

    def __call__(self, x):
        return synthesize(self, x)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        return SpectralField(self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        return SpectralField(self.coeffs - other.coeffs)

    def scaled(self, a: float) -> "SpectralField":
        return SpectralField(a * self.coeffs)

    def inner(self, other: "SpectralField") -> float:
        return float(self.coeffs @ other.coeffs)


@dataclass(frozen=True)
class GridField:
    """Samples of a field at x_j = j/N, N a power of two."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        N = v.size
        if v.ndim != 1 or N < 2 or N & (N - 1):
            raise ValueError("grid size must be a power of two >= 2")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def points(self) -> np.ndarray:
        return np.arange(self.size) / self.size


def synthesize(field: SpectralField, x):
    out = evaluate(field.coeffs, x)
    return float(out[0]) if np.ndim(x) == 0 else out


def synthesize_grid(field: SpectralField, N: int | None = None) -> GridField:
    N = default_grid_size(field.mode_cutoff) if N is None else N
    return GridField(to_grid(field.coeffs, N))


def analyze(grid: GridField, M: int) -> SpectralField:
    if grid.size < 2 * M + 2:
        raise ValueError(
            f"cutoff too large: M={M} needs at least {2 * M + 2} grid points, got {grid.size}"
        )
    return SpectralField(from_grid(grid.values, M))


def apply_heat(field: SpectralField, t: float) -> SpectralField:
    return SpectralField(heat(field.coeffs, t))


def apply_gradient(field: SpectralField) -> SpectralField:
    return SpectralField(gradient(field.coeffs))


def apply_fractional_laplacian(field: SpectralField, gamma: float) -> SpectralField:
    return SpectralField(fractional_laplacian(field.coeffs, gamma))


def heat_kernel_value(t: float, x) -> np.ndarray | float:
    """Periodized Gaussian (4 pi t)^(-1/2) sum_k exp(-(x - k)^2 / (4t)).

    Images are added until a term drops below 1e-16 of the leading one.
    """
    if not t > 0:
        raise ValueError(f"heat kernel needs t > 0, got {t}")
    xs = np.asarray(x, dtype=float)
    xr = xs - np.floor(xs)
    # exp(-d^2/4t) < 1e-16 once d^2 > 4t * 16 ln 10
    width = int(np.ceil(np.sqrt(4 * t * 16 * np.log(10)))) + 1
    shifts = np.arange(-width, width + 2)
    d = xr[..., None] - shifts
    out = np.exp(-d * d / (4 * t)).sum(axis=-1) / np.sqrt(4 * np.pi * t)
    return float(out) if np.ndim(x) == 0 else out


def heat_deriv_l2norm_sq(j: int, t: float) -> float:
    """Sum over k in Z of (2 pi k)^(2j) exp(-8 pi^2 k^2 t), i.e. ||d^j p_t||^2."""
    if j not in (0, 1, 2):
        raise ValueError("derivative order must be 0, 1 or 2")
    if not t > 0:
        raise ValueError(f"need t > 0, got {t}")
    # the summand peaks near k ~ sqrt(j)/(2 pi sqrt(2 t)); go well past it
    kmax = int(np.ceil((np.sqrt(j) + 8.0) / (TWO_PI * np.sqrt(2 * t)) * 1.5)) + 4
    k = np.arange(1, kmax + 1, dtype=float)
    terms = (TWO_PI * k) ** (2 * j) * np.exp(-8 * np.pi ** 2 * k ** 2 * t)
    head = 1.0 if j == 0 else 0.0
    return head + 2.0 * float(np.sum(terms[::-1]))
