"""Simulation configuration: nonlinearity, initial condition and run parameters."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import spectral

LIMIT_COEFFICIENT = 1.0 / (8.0 * np.pi ** 0.25)
# the alternative constant 1/(4 pi^(1/4)), kept for the discrimination experiment
ALT_LIMIT_COEFFICIENT = 1.0 / (4.0 * np.pi ** 0.25)

PLACEMENTS = {"full": 1.0, "half": 0.5, "none": 0.0}


@dataclass(frozen=True)
class NonlinearitySpec:
    """g together with g' and g*g'.

    Families: ``zero``, ``constant`` (g = a), ``linear`` (g(u) = u),
    ``sine`` (g(u) = sin(a u)), ``tanh`` (g(u) = tanh(a u)).
    """

    family: str = "sine"
    a: float = 1.0

    def __post_init__(self):
        if self.family not in ("zero", "constant", "linear", "sine", "tanh"):
            raise ValueError(f"unknown nonlinearity family {self.family!r}")

    def g(self, u):
        a = self.a
        if self.family == "zero":
            return np.zeros_like(u)
        if self.family == "constant":
            return np.full_like(u, a)
        if self.family == "linear":
            return np.array(u, dtype=float, copy=True)
        if self.family == "sine":
            return np.sin(a * u)
        return np.tanh(a * u)

    def dg(self, u):
        a = self.a
        if self.family in ("zero", "constant"):
            return np.zeros_like(u)
        if self.family == "linear":
            return np.ones_like(u)
        if self.family == "sine":
            return a * np.cos(a * u)
        return a / np.cosh(a * u) ** 2

    def gdg(self, u):
        if self.family in ("zero", "constant"):
            return np.zeros_like(u)
        if self.family == "linear":
            return np.array(u, dtype=float, copy=True)
        if self.family == "sine":
            return 0.5 * self.a * np.sin(2 * self.a * u)
        return self.g(u) * self.dg(u)

    def derivative_bound(self) -> float:
        """|g(0)| + sup|g'| + sup|g''| + sup|g'''|."""
        a = abs(self.a)
        if self.family == "zero":
            return 0.0
        if self.family == "constant":
            return a
        if self.family == "linear":
            return 1.0
        if self.family == "sine":
            return a + a ** 2 + a ** 3
        # sup|g'| = a, sup|g''| = 4a^2/(3 sqrt 3), sup|g'''| = 2a^3
        return a + 0.7699 * a ** 2 + 2.0 * a ** 3


@dataclass(frozen=True)
class InitialSpec:
    """psi: ``constant`` (c), ``smooth_sine`` (a sin(2 pi k x)) or
    ``weierstrass_quarter`` (sum_{j <= depth} a 2^(-j/4) cos(2 pi 2^j x))."""

    family: str = "constant"
    a: float = 0.5
    k: int = 1
    depth: int = 6

    def __post_init__(self):
        if self.family not in ("constant", "smooth_sine", "weierstrass_quarter"):
            raise ValueError(f"unknown initial condition family {self.family!r}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "constant":
            return np.full_like(x, self.a)
        if self.family == "smooth_sine":
            return self.a * np.sin(2 * np.pi * self.k * x)
        j = np.arange(self.depth + 1)
        return (self.a * 2.0 ** (-j / 4) * np.cos(2 * np.pi * np.outer(x, 2 ** j))).sum(-1).reshape(x.shape)

    def coefficients(self, M: int) -> np.ndarray:
        """Projection onto e_1..e_M by grid quadrature with 4x oversampling."""
        N = 4 * spectral.default_grid_size(M)
        return spectral.from_grid(self(np.arange(N) / N), M)


@dataclass(frozen=True)
class SimConfig:
    epsilon: float = 0.1
    mode_cutoff: int | None = None
    dt: float | None = None
    t_end: float = 1.0
    nonlinearity: NonlinearitySpec = field(default_factory=NonlinearitySpec)
    initial: InitialSpec = field(default_factory=InitialSpec)
    coefficient: float | None = None
    placement: str = "half"
    save_times: tuple = ()
    seed: int = 20240611
    grid_size: int | None = None

    def __post_init__(self):
        eps = self.epsilon
        if eps < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.placement not in PLACEMENTS:
            raise ValueError(f"placement must be one of {sorted(PLACEMENTS)}")
        if not 0 < self.t_end <= 1.0:
            raise ValueError("t_end must lie in (0, 1]")
        M = self.mode_cutoff
        if M is None:
            M = max(64, 2 * math.ceil(2.0 / eps)) if eps > 0 else 64
            object.__setattr__(self, "mode_cutoff", M)
        if eps > 0 and M < math.ceil(2.0 / eps):
            raise ValueError(f"mode_cutoff {M} below ceil(2/epsilon) = {math.ceil(2.0 / eps)}")
        if self.dt is None:
            cap = eps * eps / 10 if eps > 0 else 1e-3
            # largest step below the cap that divides t_end
            object.__setattr__(self, "dt", self.t_end / math.ceil(self.t_end / cap - 1e-9))
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if eps > 0 and self.dt > eps * eps / 10 * (1 + 1e-12):
            raise ValueError(f"dt = {self.dt} exceeds epsilon^2/10 = {eps * eps / 10}")
        if abs(self.t_end / self.dt - round(self.t_end / self.dt)) > 1e-6:
            raise ValueError(f"t_end {self.t_end} is not a multiple of dt = {self.dt}")
        if self.coefficient is None:
            object.__setattr__(self, "coefficient", 1.0 if eps > 0 else LIMIT_COEFFICIENT)
        if self.grid_size is None:
            object.__setattr__(self, "grid_size", spectral.default_grid_size(M))
        N = self.grid_size
        if N & (N - 1) or M // 2 >= N // 2:
            raise ValueError(f"grid size {N} must be a power of two above the top wavenumber")
        times = tuple(float(t) for t in self.save_times)
        if list(times) != sorted(set(times)):
            raise ValueError("save_times must be strictly increasing")
        for t in times:
            if t < 0 or t > self.t_end + 1e-12:
                raise ValueError(f"save time {t} outside [0, t_end]")
            if abs(t / self.dt - round(t / self.dt)) > 1e-6:
                raise ValueError(f"save time {t} is not on the step grid dt = {self.dt}")
        object.__setattr__(self, "save_times", times)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def is_limit(self) -> bool:
        return self.epsilon == 0

    def step_of(self, t: float) -> int:
        return int(round(t / self.dt))

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["save_times"] = list(self.save_times)
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]
