"""Monte Carlo estimators: moments with batch-means intervals, Hoelder norms, KS, log-log slopes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

N_BATCHES = 20
MAX_POWER = 8


@dataclass(frozen=True)
class Estimate:
    value: float
    ci: float  # 95% half-width

    def contains(self, target: float) -> bool:
        return abs(self.value - target) <= self.ci


def _t95(dof: int) -> float:
    return float(stats.t.ppf(0.975, dof))


class MCStats:
    """Power sums of one scalar, split into batches by path index.

    Path i goes to batch i mod n_batches, so the accumulator depends only on
    which paths were added, never on the order or grouping of the merges.
    """

    def __init__(self, n_batches: int = N_BATCHES):
        if n_batches < 2:
            raise ValueError("need at least two batches")
        self.n_batches = n_batches
        self.counts = np.zeros(n_batches, dtype=np.int64)
        self.sums = np.zeros((n_batches, MAX_POWER))

    def add(self, values, path_indices) -> "MCStats":
        values = np.asarray(values, dtype=float).ravel()
        idx = np.asarray(path_indices, dtype=np.int64).ravel() % self.n_batches
        powers = values[:, None] ** np.arange(1, MAX_POWER + 1)
        np.add.at(self.sums, idx, powers)
        np.add.at(self.counts, idx, 1)
        return self

    def merge(self, other: "MCStats") -> "MCStats":
        if other.n_batches != self.n_batches:
            raise ValueError("batch layouts differ")
        out = MCStats(self.n_batches)
        out.counts = self.counts + other.counts
        out.sums = self.sums + other.sums
        return out

    @property
    def count(self) -> int:
        return int(self.counts.sum())

    def raw_moment(self, p: int) -> float:
        return float(self.sums[:, p - 1].sum() / self.count)

    def mean(self) -> Estimate:
        return self._batched(lambda s, c: s[..., 0] / c, min_count=1)

    def variance(self) -> Estimate:
        def var(s, c):
            m = s[..., 0] / c
            return (s[..., 1] / c - m * m) * c / (c - 1)
        return self._batched(var, min_count=2)

    def _batched(self, stat, min_count: int) -> Estimate:
        """Full-sample statistic with a t interval from the spread of per-batch values."""
        if self.count < min_count:
            raise ValueError("not enough samples")
        full = stat(self.sums.sum(axis=0), self.count)
        ok = self.counts >= min_count
        nb = int(ok.sum())
        if nb < 2:
            return Estimate(float(full), float("nan"))
        per_batch = stat(self.sums[ok], self.counts[ok].astype(float))
        half = _t95(nb - 1) * per_batch.std(ddof=1) / np.sqrt(nb)
        return Estimate(float(full), float(half))


def batch_means_ci(values: np.ndarray, n_batches: int = N_BATCHES) -> float:
    """95% half-width for the mean of ``values`` from contiguous batch means."""
    values = np.asarray(values, dtype=float)
    nb = min(n_batches, values.size)
    if nb < 2:
        return float("nan")
    means = np.array([b.mean() for b in np.array_split(values, nb)])
    return _t95(nb - 1) * means.std(ddof=1) / np.sqrt(nb)


def lp_moment(samples, p: float) -> Estimate:
    """(E|X|^p)^(1/p) with a batch-means interval carried through the 1/p power."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty sample")
    if not 1 <= p <= MAX_POWER:
        raise ValueError(f"p must lie in [1, {MAX_POWER}]")
    ap = np.abs(x) ** p
    m = ap.mean()
    value = m ** (1.0 / p)
    ci = batch_means_ci(ap)
    if m > 0 and np.isfinite(ci):
        ci = value * ci / (p * m)
    else:
        ci = 0.0
    return Estimate(float(value), float(ci))


def lp_moments_columns(samples: np.ndarray, p: float) -> np.ndarray:
    """Column-wise (E|X|^p)^(1/p) for a (paths, points) array."""
    return np.mean(np.abs(samples) ** p, axis=0) ** (1.0 / p)


@dataclass(frozen=True)
class HolderEstimate:
    alpha: float
    p: float
    value: float  # the seminorm
    ci: float
    grid_resolution: int
    sup_norm: float
    n_pairs: int

    @property
    def norm(self) -> float:
        return self.sup_norm + self.value


def dyadic_pair_schedule(N: int, pair_budget: int, decades: float = 1.0):
    """Deterministic (offset, separation) index pairs on an N-point torus grid.

    Separations are powers of two from one grid cell up to a span of the given
    number of decades; the budget is split evenly across them and the left
    points are spread uniformly over the circle.
    """
    n_sep = max(1, int(np.floor(np.log2(10.0 ** decades))) + 1)
    seps = [1 << j for j in range(n_sep) if (1 << j) <= N // 2]
    per = max(1, pair_budget // len(seps))
    pairs = []
    for d in seps:
        count = min(per, N)
        starts = (np.arange(count) * N) // count
        pairs.extend((int(i), d) for i in starts)
    return pairs


def holder_seminorm(ensemble: np.ndarray, alpha: float, p: float, pair_budget: int = 2048,
                    decades: float | None = None) -> HolderEstimate:
    """max over probed pairs of ||u(x) - u(y)||_{L_p} / |x - y|^alpha.

    ``ensemble`` holds grid samples, shape (paths, N). By default the
    separations run from one cell up to half the circle.
    """
    u = np.asarray(ensemble, dtype=float)
    if u.ndim == 1:
        u = u[None, :]
    N = u.shape[1]
    if N < 2:
        raise ValueError("need at least two grid points")
    if decades is None:
        decades = np.log10(N / 2)
    pairs = dyadic_pair_schedule(N, pair_budget, decades)
    best, best_ci = 0.0, 0.0
    for i, d in pairs:
        diff = u[:, (i + d) % N] - u[:, i]
        est = lp_moment(diff, p)
        q = est.value / (d / N) ** alpha
        if q > best:
            best, best_ci = q, est.ci / (d / N) ** alpha
    sup = float(np.max(lp_moments_columns(u, p)))
    return HolderEstimate(alpha, p, float(best), float(best_ci), N, sup, len(pairs))


def empirical_cov(a_s, a_t, b_s, b_t) -> Estimate:
    """Covariance over paths of the increments a_t - a_s and b_t - b_s."""
    da = np.asarray(a_t, dtype=float) - np.asarray(a_s, dtype=float)
    db = np.asarray(b_t, dtype=float) - np.asarray(b_s, dtype=float)
    if da.size < 100:
        raise ValueError(f"too few paths: {da.size} < 100")
    prod = (da - da.mean()) * (db - db.mean())
    value = prod.sum() / (da.size - 1)
    return Estimate(float(value), batch_means_ci(prod))


def correlation(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.corrcoef(a, b)[0, 1])


@dataclass(frozen=True)
class KSResult:
    statistic: float
    pvalue: float


def ks_two_sample(a, b) -> KSResult:
    """Two-sample Kolmogorov-Smirnov distance with the asymptotic p-value."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size == 0 or b.size == 0:
        raise ValueError("empty sample")
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / a.size
    cdf_b = np.searchsorted(b, pooled, side="right") / b.size
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    en = np.sqrt(a.size * b.size / (a.size + b.size))
    pvalue = float(stats.kstwobign.sf(en * d))
    return KSResult(d, min(1.0, max(0.0, pvalue)))


def ks_bootstrap_ci(a, b, n_boot: int = 200, seed: int = 0) -> float:
    """95% half-width of the KS statistic from a paired bootstrap."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    rng = np.random.default_rng(seed)
    vals = [ks_two_sample(rng.choice(a, a.size), rng.choice(b, b.size)).statistic
            for _ in range(n_boot)]
    lo, hi = np.percentile(vals, [2.5, 97.5])
    return float((hi - lo) / 2)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    ci: float
    intercept: float


def loglog_slope(xs, ys) -> SlopeFit:
    """Least-squares slope of log y against log x, with a 95% residual-based interval."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size < 3:
        raise ValueError("need at least three points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive data")
    fit = stats.linregress(np.log(x), np.log(y))
    ci = _t95(x.size - 2) * fit.stderr
    return SlopeFit(float(fit.slope), float(ci), float(fit.intercept))
