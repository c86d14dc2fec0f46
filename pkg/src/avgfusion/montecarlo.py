"""Monte Carlo comparison of AA and GA fusion of correlated positive variables.

Sample pairs come from a truncated bivariate Gaussian or from a Gaussian
copula with Poisson margins.  All randomness flows from ``spec.seed``
through ``numpy.random.SeedSequence`` into Philox counter-based generators:
stream 0 draws the pairs, so results do not depend on how the per-weight
evaluation is scheduled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy import optimize, stats

from avgfusion.core import TruthContext

Family = Literal["truncated_gaussian", "poisson"]

MIN_SAMPLES = 10_000
DEFAULT_GRID_SIZE = 99
_CHUNK = 1 << 18


@dataclass(frozen=True)
class CorrelatedPairSpec:
    """Parameters of a correlated positive pair.

    ``params1``/``params2`` are ``(mean, variance)`` for the truncated
    Gaussian family and ``(rate,)`` for Poisson.
    """

    family: Family
    params1: tuple[float, ...]
    params2: tuple[float, ...]
    target_rho: float = 0.0
    n_samples: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "params1", tuple(float(p) for p in self.params1))
        object.__setattr__(self, "params2", tuple(float(p) for p in self.params2))
        if self.family == "truncated_gaussian":
            for p in (self.params1, self.params2):
                if len(p) != 2 or not p[1] > 0:
                    raise ValueError("gaussian params are (mean, variance>0)")
        elif self.family == "poisson":
            for p in (self.params1, self.params2):
                if len(p) != 1 or not p[0] > 0:
                    raise ValueError("poisson params are (rate>0,)")
        else:
            raise ValueError(f"unknown family {self.family!r}")
        if not -1.0 < self.target_rho < 1.0:
            raise ValueError("target_rho must lie in (-1, 1)")
        if self.n_samples < MIN_SAMPLES:
            raise ValueError(f"n_samples must be >= {MIN_SAMPLES}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def variances(self) -> tuple[float, float]:
        if self.family == "poisson":
            return self.params1[0], self.params2[0]
        return self.params1[1], self.params2[1]

    @property
    def means(self) -> tuple[float, float]:
        if self.family == "poisson":
            return self.params1[0], self.params2[0]
        return self.params1[0], self.params2[0]


@dataclass(frozen=True, eq=False)
class SweepResult:
    weights_grid: np.ndarray
    aa_mean: np.ndarray
    aa_var: np.ndarray
    aa_mse: np.ndarray
    ga_mean: np.ndarray
    ga_var: np.ndarray
    ga_mse: np.ndarray
    aa_var_se: np.ndarray
    ga_var_se: np.ndarray
    achieved_rho: float
    # per-source sample statistics against the truth
    var1: float
    var2: float
    mse1: float
    mse2: float
    beta: float

    def __len__(self) -> int:
        return self.weights_grid.size


def stream(seed: int, index: int) -> np.random.Generator:
    """Independent Philox generator for substream ``index`` of ``seed``."""
    child = np.random.SeedSequence(seed).spawn(index + 1)[index]
    return np.random.Generator(np.random.Philox(child))


def _gaussian_pairs(spec: CorrelatedPairSpec, rng: np.random.Generator):
    (m1, v1), (m2, v2) = spec.params1, spec.params2
    s1, s2 = math.sqrt(v1), math.sqrt(v2)
    r = spec.target_rho
    c = math.sqrt(1.0 - r * r)
    n = spec.n_samples
    out1, out2, have = [], [], 0
    while have < n:
        z = rng.standard_normal((2, _CHUNK))
        x1 = m1 + s1 * z[0]
        x2 = m2 + s2 * (r * z[0] + c * z[1])
        keep = (x1 > 0) & (x2 > 0)
        out1.append(x1[keep])
        out2.append(x2[keep])
        have += int(keep.sum())
    return np.concatenate(out1)[:n], np.concatenate(out2)[:n]


def _bvn_cdf(a: np.ndarray, b: np.ndarray, r: float) -> np.ndarray:
    if r >= 1.0:
        return stats.norm.cdf(np.minimum(a, b))
    if r <= -1.0:
        return np.maximum(stats.norm.cdf(a) + stats.norm.cdf(b) - 1.0, 0.0)
    pts = np.column_stack([a.ravel(), b.ravel()])
    mvn = stats.multivariate_normal(mean=[0.0, 0.0], cov=[[1.0, r], [r, 1.0]])
    return np.asarray(mvn.cdf(pts)).reshape(a.shape)


def _poisson_grid(lam: float):
    k = np.arange(int(stats.poisson.ppf(1.0 - 1e-13, lam)) + 1)
    cdf = stats.poisson.cdf(k, lam)
    return k, cdf, stats.norm.ppf(np.clip(cdf, 0.0, 1.0 - 1e-15))


def norta_poisson_correlation(lam1: float, lam2: float, copula_rho: float) -> float:
    """Pearson correlation of Poisson margins joined by a Gaussian copula.

    Uses Hoeffding's covariance identity summed over the support.
    """
    _, f1, z1 = _poisson_grid(lam1)
    _, f2, z2 = _poisson_grid(lam2)
    a, b = np.meshgrid(z1, z2, indexing="ij")
    joint = _bvn_cdf(a, b, copula_rho)
    cov = float(np.sum(joint - np.outer(f1, f2)))
    return cov / math.sqrt(lam1 * lam2)


@lru_cache(maxsize=256)
def calibrate_poisson_copula(lam1: float, lam2: float, target_rho: float) -> float:
    """Copula correlation whose Poisson-margin Pearson correlation hits ``target_rho``."""
    if target_rho == 0.0:
        return 0.0
    lo = norta_poisson_correlation(lam1, lam2, -1.0)
    hi = norta_poisson_correlation(lam1, lam2, 1.0)
    if not lo <= target_rho <= hi:
        raise ValueError(
            f"target_rho {target_rho} infeasible for Poisson({lam1}), Poisson({lam2}); "
            f"attainable range is [{lo:.5f}, {hi:.5f}]"
        )
    return optimize.brentq(
        lambda r: norta_poisson_correlation(lam1, lam2, r) - target_rho, -1.0, 1.0, xtol=1e-10
    )


def _poisson_pairs(spec: CorrelatedPairSpec, rng: np.random.Generator):
    lam1, lam2 = spec.params1[0], spec.params2[0]
    r = calibrate_poisson_copula(lam1, lam2, spec.target_rho)
    c = math.sqrt(max(1.0 - r * r, 0.0))
    _, cdf1, _ = _poisson_grid(lam1)
    _, cdf2, _ = _poisson_grid(lam2)
    n = spec.n_samples
    out1, out2, have = [], [], 0
    while have < n:
        z = rng.standard_normal((2, _CHUNK))
        u1 = stats.norm.cdf(z[0])
        u2 = stats.norm.cdf(r * z[0] + c * z[1])
        # inverse CDF: smallest k with F(k) >= u
        x1 = np.searchsorted(cdf1, u1, side="left").astype(float)
        x2 = np.searchsorted(cdf2, u2, side="left").astype(float)
        # GA needs strictly positive values; zeros are redrawn
        keep = (x1 > 0) & (x2 > 0)
        out1.append(x1[keep])
        out2.append(x2[keep])
        have += int(keep.sum())
    return np.concatenate(out1)[:n], np.concatenate(out2)[:n]


def sample_pairs(spec: CorrelatedPairSpec) -> tuple[np.ndarray, np.ndarray, float]:
    """Draw ``spec.n_samples`` positive pairs; return them with their Pearson correlation."""
    rng = stream(spec.seed, 0)
    if spec.family == "truncated_gaussian":
        x1, x2 = _gaussian_pairs(spec, rng)
    else:
        x1, x2 = _poisson_pairs(spec, rng)
    rho = float(np.corrcoef(x1, x2)[0, 1])
    return x1, x2, rho


def weight_grid(grid_size: int) -> np.ndarray:
    if grid_size < 3:
        raise ValueError("grid_size must be >= 3")
    return np.arange(1, grid_size + 1) / (grid_size + 1)


def _var_and_se(y: np.ndarray) -> tuple[float, float]:
    d = y - y.mean()
    d2 = d * d
    var = float(d2.mean())
    m4 = float((d2 * d2).mean())
    return var, math.sqrt(max(m4 - var * var, 0.0) / y.size)


def sweep_samples(
    x1: np.ndarray,
    x2: np.ndarray,
    truth: TruthContext,
    grid_size: int = DEFAULT_GRID_SIZE,
    achieved_rho: float | None = None,
) -> SweepResult:
    """Empirical AA/GA statistics over the open weight grid for fixed samples."""
    grid = weight_grid(grid_size)
    if achieved_rho is None:
        achieved_rho = float(np.corrcoef(x1, x2)[0, 1])
    theta = truth.theta
    l1, l2 = np.log(x1), np.log(x2)
    cols = {k: np.empty(grid.size) for k in
            ("aa_mean", "aa_var", "aa_mse", "ga_mean", "ga_var", "ga_mse", "aa_var_se", "ga_var_se")}
    for k, w1 in enumerate(grid):
        w2 = 1.0 - w1
        aa = w1 * x1 + w2 * x2
        ga = np.exp(w1 * l1 + w2 * l2)
        cols["aa_mean"][k] = aa.mean()
        cols["aa_var"][k], cols["aa_var_se"][k] = _var_and_se(aa)
        cols["aa_mse"][k] = np.mean((aa - theta) ** 2)
        cols["ga_mean"][k] = ga.mean()
        cols["ga_var"][k], cols["ga_var_se"][k] = _var_and_se(ga)
        cols["ga_mse"][k] = np.mean((ga - theta) ** 2)
    e1, e2 = theta - x1, theta - x2
    mse1, mse2 = float(np.mean(e1 * e1)), float(np.mean(e2 * e2))
    beta = float(np.mean(e1 * e2)) / math.sqrt(mse1 * mse2)
    return SweepResult(
        weights_grid=grid,
        achieved_rho=achieved_rho,
        var1=float(x1.var()),
        var2=float(x2.var()),
        mse1=mse1,
        mse2=mse2,
        beta=beta,
        **cols,
    )


def sweep_weights(
    spec: CorrelatedPairSpec, truth: TruthContext, grid_size: int = DEFAULT_GRID_SIZE
) -> SweepResult:
    x1, x2, rho = sample_pairs(spec)
    return sweep_samples(x1, x2, truth, grid_size, achieved_rho=rho)
