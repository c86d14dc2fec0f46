"""Arithmetic and geometric averaging of point estimates (random variables).

Closed forms for the variance and MSE of the two-source arithmetic average,
the convex weight-response function ``h`` and its minimiser, plus the
unweighted-average optimality test.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from avgfusion.core import FusionWeights, as_weights


def _check_corr(value: float, name: str) -> float:
    if not -1.0 < value < 1.0:
        raise ValueError(f"{name} must lie in (-1, 1), got {value}")
    return float(value)


def _check_positive(value: float, name: str) -> float:
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return float(value)


def _check_pair(w: FusionWeights | Sequence[float]) -> FusionWeights:
    w = as_weights(w)
    if len(w) != 2:
        raise ValueError("closed forms are two-source; got %d weights" % len(w))
    return w


def v_aa(values: Sequence[float], w: FusionWeights | Sequence[float]) -> float:
    w = as_weights(w)
    if len(values) != len(w):
        raise ValueError(f"length mismatch: {len(values)} values, {len(w)} weights")
    return math.fsum(wi * float(v) for wi, v in zip(w, values))


def v_ga(values: Sequence[float], w: FusionWeights | Sequence[float]) -> float:
    """Weighted geometric mean, computed as exp of the weighted log-average."""
    w = as_weights(w)
    if len(values) != len(w):
        raise ValueError(f"length mismatch: {len(values)} values, {len(w)} weights")
    if any(not float(v) > 0 for v in values):
        raise ValueError("GA undefined for non-positive values")
    return math.exp(math.fsum(wi * math.log(v) for wi, v in zip(w, values)))


def aa_variance(cov: np.ndarray, w: FusionWeights | Sequence[float]) -> float:
    """Variance of the n-source AA as the quadratic form w^T C w."""
    w = as_weights(w).as_array()
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (w.size, w.size):
        raise ValueError(f"covariance shape {cov.shape} does not match {w.size} weights")
    if not np.allclose(cov, cov.T, rtol=1e-12, atol=1e-12):
        raise ValueError("covariance matrix is not symmetric")
    eig = np.linalg.eigvalsh(cov)
    if eig.min() < -1e-9 * max(1.0, abs(eig.max())):
        raise ValueError("covariance matrix is not positive semi-definite")
    return float(w @ cov @ w)


def aa_variance_two(s1: float, s2: float, rho: float, w: FusionWeights | Sequence[float]) -> float:
    _check_positive(s1, "s1")
    _check_positive(s2, "s2")
    rho = _check_corr(rho, "rho")
    w1, w2 = _check_pair(w)
    return w1 * w1 * s1 + w2 * w2 * s2 + 2.0 * w1 * w2 * rho * math.sqrt(s1 * s2)


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def h_function(w, alpha, rho):
    """Normalised AA variance as a function of the second source's weight.

    Arguments broadcast as numpy arrays; scalar inputs give a float.
    """
    w, alpha, rho = (np.asarray(v, dtype=float) for v in (w, alpha, rho))
    if not np.all((w > 0.0) & (w < 1.0)):
        raise ValueError(f"w must lie in (0, 1), got {w}")
    if not np.all(alpha > 0):
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not np.all((rho > -1.0) & (rho < 1.0)):
        raise ValueError(f"rho must lie in (-1, 1), got {rho}")
    h = 1.0 - 2.0 * w + w * w + w * w * alpha + 2.0 * rho * np.sqrt(alpha) * (w - w * w)
    return _scalar_or_array(h)


@dataclass(frozen=True)
class BoundaryOptimum:
    """The infimum of ``h`` is not attained inside (0, 1).

    ``omega1_limit`` is the first-source weight the infimum is approached at,
    and ``h_limit`` the limiting value of ``h`` there.
    """

    omega1_limit: float
    h_limit: float


def optimal_aa_weights(alpha: float, rho: float) -> FusionWeights | BoundaryOptimum:
    """Weights minimising ``h``; ``alpha`` is the larger over the smaller variance."""
    _check_positive(alpha, "alpha")
    if alpha < 1.0:
        raise ValueError("alpha must be >= 1; swap the sources first")
    rho = _check_corr(rho, "rho")
    sa = math.sqrt(alpha)
    if rho >= 1.0 / sa:
        # source 1 has the smaller variance, so w2 -> 0 gives h -> 1
        return BoundaryOptimum(omega1_limit=1.0, h_limit=1.0)
    denom = 1.0 + alpha - 2.0 * rho * sa
    w2 = (1.0 - rho * sa) / denom
    if not 0.0 < w2 < 1.0:
        return BoundaryOptimum(omega1_limit=1.0, h_limit=1.0)
    return FusionWeights((1.0 - w2, w2))


def aa_variance_lower_bound(s1: float, s2: float, rho: float) -> float:
    _check_positive(s1, "s1")
    _check_positive(s2, "s2")
    rho = _check_corr(rho, "rho")
    lo, hi = min(s1, s2), max(s1, s2)
    if rho >= math.sqrt(lo / hi):
        return lo
    alpha = hi / lo
    return alpha * (1.0 - rho * rho) / (1.0 + alpha - 2.0 * rho * math.sqrt(alpha)) * lo


def aa_mse_two(m1: float, m2: float, beta: float, w: FusionWeights | Sequence[float]) -> float:
    _check_positive(m1, "m1")
    _check_positive(m2, "m2")
    beta = _check_corr(beta, "beta")
    w1, w2 = _check_pair(w)
    return w1 * w1 * m1 + w2 * w2 * m2 + 2.0 * w1 * w2 * beta * math.sqrt(m1 * m2)


def aa_mse_lower_bound(m1: float, m2: float, beta: float) -> float:
    # same algebra as the variance bound with (mse, beta) in place of (variance, rho)
    return aa_variance_lower_bound(m1, m2, beta)


def unweighted_gain_threshold(gamma):
    """Largest MSE correlation for which the unweighted AA beats the best source."""
    gamma = np.asarray(gamma, dtype=float)
    if not np.all(gamma > 0):
        raise ValueError(f"gamma must be positive, got {gamma}")
    return _scalar_or_array((3.0 - gamma) / (2.0 * np.sqrt(gamma)))


def unweighted_aa_beats_best(gamma, beta):
    """True where the equal-weight AA has lower MSE than the better source.

    Broadcasts like :func:`h_function`; scalar inputs give a bool.
    """
    gamma, beta = np.asarray(gamma, dtype=float), np.asarray(beta, dtype=float)
    if not np.all(gamma >= 1.0):
        raise ValueError("gamma must be >= 1; swap the sources first")
    if not np.all((beta > -1.0) & (beta < 1.0)):
        raise ValueError(f"beta must lie in (-1, 1), got {beta}")
    out = beta < unweighted_gain_threshold(gamma)
    return bool(out) if out.ndim == 0 else out
