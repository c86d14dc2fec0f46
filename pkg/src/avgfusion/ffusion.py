"""Arithmetic and geometric averaging of probability densities.

Closed forms cover pairs of Gaussians (the GA being covariance
intersection).  Arbitrary densities go through tabulated grids.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from avgfusion.core import (
    FusionWeights,
    Gaussian1D,
    GridDensity,
    MomentSummary,
    MseBreakdown,
    TruthContext,
    as_weights,
    trapezoid,
)

# below this the GA normalising constant is treated as numerically zero
MIN_GA_MASS = 1e-12


def _pair(w) -> tuple[float, float]:
    w = as_weights(w)
    if len(w) != 2:
        raise ValueError("Gaussian closed forms take exactly two weights")
    return w[0], w[1]


def gaussian_aa_moments(g1: Gaussian1D, g2: Gaussian1D, w) -> MomentSummary:
    w1, w2 = _pair(w)
    spread = w1 * w2 * (g1.mean - g2.mean) ** 2
    return MomentSummary(
        mean=w1 * g1.mean + w2 * g2.mean,
        variance=w1 * g1.variance + w2 * g2.variance + spread,
    )


def gaussian_ga(g1: Gaussian1D, g2: Gaussian1D, w) -> Gaussian1D:
    w1, w2 = _pair(w)
    p1, p2 = w1 / g1.variance, w2 / g2.variance
    return Gaussian1D(
        mean=(p1 * g1.mean + p2 * g2.mean) / (p1 + p2),
        variance=g1.variance * g2.variance / (w1 * g2.variance + w2 * g1.variance),
    )


def gaussian_mse(g: Gaussian1D, truth: TruthContext) -> float:
    return g.variance + (g.mean - truth.theta) ** 2


def gaussian_aa_mse(g1: Gaussian1D, g2: Gaussian1D, w, truth: TruthContext) -> MseBreakdown:
    """MSE of the Gaussian AA as a weighted sum of per-source MSEs.

    ``variance_part`` aggregates the source variances and ``bias_sq_part`` the
    source squared biases; this is not the split about the fused mean.
    """
    w1, w2 = _pair(w)
    xi1, xi2 = g1.mean - truth.theta, g2.mean - truth.theta
    var_part = w1 * g1.variance + w2 * g2.variance
    bias_part = w1 * xi1 * xi1 + w2 * xi2 * xi2
    total = w1 * gaussian_mse(g1, truth) + w2 * gaussian_mse(g2, truth)
    return MseBreakdown(total, var_part, bias_part, {"xi1": xi1, "xi2": xi2})


def gaussian_ga_mse(g1: Gaussian1D, g2: Gaussian1D, w, truth: TruthContext) -> MseBreakdown:
    w1, w2 = _pair(w)
    p1, p2 = w1 / g1.variance, w2 / g2.variance
    a = p1 / (p1 + p2)
    b = 1.0 - a
    xi1, xi2 = g1.mean - truth.theta, g2.mean - truth.theta
    var_part = g1.variance * g2.variance / (w1 * g2.variance + w2 * g1.variance)
    bias_part = (a * xi1 + b * xi2) ** 2
    return MseBreakdown(var_part + bias_part, var_part, bias_part,
                        {"a": a, "b": b, "xi1": xi1, "xi2": xi2})


def _check_grids(ds: Sequence[GridDensity], w: FusionWeights) -> None:
    if len(ds) != len(w):
        raise ValueError(f"{len(ds)} densities but {len(w)} weights")
    first = ds[0]
    for d in ds[1:]:
        if not first.same_grid(d):
            raise ValueError("grid mismatch: densities must share x_min, x_max and n_points")
    for d in ds:
        if not d.normalized:
            raise ValueError("unnormalized density")


def grid_aa(ds: Sequence[GridDensity], w) -> GridDensity:
    w = as_weights(w)
    _check_grids(ds, w)
    values = sum(wi * d.values for wi, d in zip(w, ds))
    return GridDensity(ds[0].x_min, ds[0].x_max, values)


def grid_ga(ds: Sequence[GridDensity], w) -> GridDensity:
    """Normalised weighted product of densities.

    Points where any input is zero are outside the product support.  When
    the product integrates to less than ``MIN_GA_MASS`` it is returned
    unnormalised (so ``normalized`` is False).
    """
    w = as_weights(w)
    _check_grids(ds, w)
    support = np.logical_and.reduce([d.support for d in ds])
    if not support.any():
        raise ValueError("GA undefined: disjoint supports")
    logs = np.zeros(ds[0].n_points)
    for wi, d in zip(w, ds):
        logs[support] += wi * np.log(d.values[support])
    values = np.where(support, np.exp(logs), 0.0)
    mass = trapezoid(values, ds[0].dx)
    if mass >= MIN_GA_MASS:
        values = values / mass
    return GridDensity(ds[0].x_min, ds[0].x_max, values)


@dataclass(frozen=True, eq=False)
class MseSurface:
    """Closed-form AA/GA variance and MSE over a (theta, omega1) grid.

    Arrays are indexed ``[i_theta, i_omega]``.
    """

    thetas: np.ndarray
    omegas: np.ndarray
    aa_var: np.ndarray
    ga_var: np.ndarray
    aa_mse: np.ndarray
    ga_mse: np.ndarray

    @property
    def ga_better(self) -> np.ndarray:
        return self.ga_mse < self.aa_mse


def mse_surface(g1: Gaussian1D, g2: Gaussian1D, thetas: Sequence[float],
                omegas: Sequence[float]) -> MseSurface:
    thetas = np.asarray(thetas, dtype=float)
    omegas = np.asarray(omegas, dtype=float)
    shape = (thetas.size, omegas.size)
    out = {k: np.empty(shape) for k in ("aa_var", "ga_var", "aa_mse", "ga_mse")}
    for j, w1 in enumerate(omegas):
        w = FusionWeights.pair(w1)
        aa_var = gaussian_aa_moments(g1, g2, w).variance
        ga_var = gaussian_ga(g1, g2, w).variance
        for i, theta in enumerate(thetas):
            truth = TruthContext(theta)
            out["aa_var"][i, j] = aa_var
            out["ga_var"][i, j] = ga_var
            out["aa_mse"][i, j] = gaussian_aa_mse(g1, g2, w, truth).total
            out["ga_mse"][i, j] = gaussian_ga_mse(g1, g2, w, truth).total
    return MseSurface(thetas, omegas, **out)


def uniform_linear_pair(n_points: int = 4001) -> tuple[GridDensity, GridDensity, float]:
    """Uniform and linear densities that are both unbiased for theta = 2*sqrt(2)/3.

    The grid spans the uniform support (0, 4*sqrt(2)/3]; with ``n_points - 1``
    a multiple of 4 the end of the linear density, sqrt(2), is a grid node.
    Jump nodes carry the one-sided limit at grid ends and the mid value in the
    interior, which makes the trapezoid mass of both densities exact.
    """
    if (n_points - 1) % 4:
        raise ValueError("n_points - 1 must be a multiple of 4")
    root2 = np.sqrt(2.0)
    hi = 4.0 * root2 / 3.0
    x = np.linspace(0.0, hi, n_points)
    uniform = np.full(n_points, 3.0 * root2 / 8.0)
    k = 3 * (n_points - 1) // 4
    linear = np.where(np.arange(n_points) < k, x, 0.0)
    linear[k] = 0.5 * root2
    return GridDensity(0.0, hi, uniform), GridDensity(0.0, hi, linear), 2.0 * root2 / 3.0
