"""Cylindrical Brownian increments on the e_n basis and the mollified gradient noise.

Randomness is counter based: the normal for (seed, path, step, mode) is a
pure function of those four integers, computed from numpy's Philox
generator keyed by (seed, path) with the counter positioned at the step.
Any batching of paths or steps therefore yields the same numbers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .spectral import SpectralField

_TWO_POW_M53 = 2.0 ** -53


@dataclass(frozen=True)
class BrownianIncrements:
    dw: np.ndarray
    dt: float

    @property
    def mode_cutoff(self) -> int:
        return self.dw.shape[-1]


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    path_index: int
    step_counter: int = 0

    def advanced(self, steps: int = 1) -> "RngStream":
        return RngStream(self.master_seed, self.path_index, self.step_counter + steps)


def _blocks_per_step(M: int) -> int:
    # Box-Muller uses pairs of uniforms; Philox4x64 yields four per counter value
    return (M + (M % 2) + 3) // 4


def standard_normals(seed: int, paths, step0: int, n_steps: int, M: int) -> np.ndarray:
    """Unit normals with shape (len(paths), n_steps, M) for steps step0..step0+n_steps-1."""
    paths = np.atleast_1d(np.asarray(paths, dtype=np.int64))
    blocks = _blocks_per_step(M)
    width = 4 * blocks
    raw = np.empty((paths.size, n_steps * width), dtype=np.uint64)
    counter = np.zeros(4, dtype=np.uint64)
    counter[0] = step0 * blocks
    seed_word = np.uint64(seed % (1 << 64))
    for row, p in enumerate(paths):
        key = np.array([seed_word, np.uint64(int(p))], dtype=np.uint64)
        bitgen = np.random.Philox(counter=counter, key=key)
        raw[row] = bitgen.random_raw(n_steps * width)
    raw = raw.reshape(paths.size, n_steps, width)
    # uniforms in (0, 1], so the logarithm below is finite
    u = ((raw >> np.uint64(11)).astype(np.float64) + 1.0) * _TWO_POW_M53
    radius = np.sqrt(-2.0 * np.log(u[..., 0::2]))
    angle = 2.0 * np.pi * u[..., 1::2]
    z = np.empty_like(u)
    z[..., 0::2] = radius * np.cos(angle)
    z[..., 1::2] = radius * np.sin(angle)
    return z[..., :M]


class IncrementSource:
    """Serves per-step increments for a block of paths, generating in chunks."""

    def __init__(self, seed: int, paths, M: int, dt: float, chunk_values: int = 1 << 22):
        if not dt > 0:
            raise ValueError("dt must be positive")
        self.seed = int(seed)
        self.paths = np.atleast_1d(np.asarray(paths, dtype=np.int64))
        self.M = M
        self.sqrt_dt = np.sqrt(dt)
        self.chunk = max(1, chunk_values // max(1, self.paths.size * M))
        self._start = None
        self._buf = None

    def __call__(self, step: int) -> np.ndarray:
        if self._start is None or not (self._start <= step < self._start + self._buf.shape[1]):
            self._start = step
            self._buf = standard_normals(self.seed, self.paths, step, self.chunk, self.M)
        return self._buf[:, step - self._start, :] * self.sqrt_dt


def sample_increments(stream: RngStream, M: int, dt: float) -> tuple[BrownianIncrements, RngStream]:
    """Increments for one path and one step, plus the advanced stream."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if M < 1:
        raise ValueError("need at least one mode")
    z = standard_normals(stream.master_seed, [stream.path_index], stream.step_counter, 1, M)
    return BrownianIncrements(z[0, 0] * np.sqrt(dt), dt), stream.advanced()


def grad_mollifier_coeffs(coeffs: np.ndarray, eps: float) -> np.ndarray:
    """Coefficients of grad P_{eps^2} f."""
    if not eps > 0:
        raise ValueError(f"epsilon must be positive, got {eps}")
    return spectral.gradient(spectral.heat(coeffs, eps * eps))


def grad_mollifier_action(field: SpectralField, eps: float) -> SpectralField:
    return SpectralField(grad_mollifier_coeffs(field.coeffs, eps))


def noise_field_coeffs(dw: np.ndarray, eps: float) -> np.ndarray:
    """Adjoint of grad P_{eps^2} applied to the increment vector.

    The pairing (grad P f, dw) equals (f, Z) with Z = -grad P dw, so a
    single grid product with Z gives the pairing for every test function.
    """
    return -grad_mollifier_coeffs(dw, eps)


def white_noise_pairing(h: SpectralField, inc: BrownianIncrements) -> float:
    if h.mode_cutoff != inc.mode_cutoff:
        raise ValueError(
            f"mode cutoff mismatch: field has {h.mode_cutoff}, increments have {inc.mode_cutoff}"
        )
    return float(h.coeffs @ inc.dw)


def bracket_norm_cells(kind: str, eps: float, alpha: float, n_max: int | None = None) -> np.ndarray:
    """The per-mode quantities whose supremum over n is the bracket norm."""
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    if n_max is None:
        n_max = max(64, int(np.ceil(10.0 / eps)))
    n = np.arange(1, n_max + 1, dtype=float)
    k = (np.arange(1, n_max + 1) // 2).astype(float)
    damp = np.exp(-4 * np.pi ** 2 * k ** 2 * eps ** 2)
    if kind == "grad_mollified":
        mult = eps ** 0.75 * 2 * np.pi * k * damp
    elif kind == "fractional_quarter":
        mult = np.sqrt(2 * np.pi * k) * damp
    else:
        raise ValueError(f"unsupported bracket norm kind: {kind!r}")
    # a window of length n^-2 contributes a standard deviation n^-1 * |multiplier|
    return n ** alpha * mult / n


def bracket_norm(kind: str, eps: float, alpha: float, n_max: int | None = None) -> float:
    """sup_n of the L2 size of the noise tested on a window of length n^-2 times e_n, times n^alpha.

    ``grad_mollified`` is eps^(3/4) grad xi_eps, ``fractional_quarter`` is
    (-Laplacian)^(1/4) xi_eps. White-in-time noise makes the window start
    irrelevant, so no supremum over it is taken.
    """
    return float(np.max(bracket_norm_cells(kind, eps, alpha, n_max)))
