"""Shared value types and moment/MSE primitives for tabulated densities."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

WEIGHT_SUM_TOL = 1e-12
NORMALIZATION_TOL = 1e-6
DEFAULT_GRID_POINTS = 4001
DEFAULT_PAD_SIGMAS = 6.0


@dataclass(frozen=True)
class FusionWeights:
    """Convex fusion weights, each strictly inside (0, 1)."""

    weights: tuple[float, ...]

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        object.__setattr__(self, "weights", w)
        if len(w) < 2:
            raise ValueError("need at least two fusion weights")
        if any(not (0.0 < v < 1.0) for v in w):
            raise ValueError(f"fusion weights must lie in (0, 1), got {w}")
        if abs(math.fsum(w) - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"fusion weights must sum to 1, got {math.fsum(w)!r}")

    @classmethod
    def uniform(cls, n: int) -> "FusionWeights":
        return cls((1.0 / n,) * n)

    @classmethod
    def pair(cls, omega1: float) -> "FusionWeights":
        return cls((omega1, 1.0 - omega1))

    def __len__(self) -> int:
        return len(self.weights)

    def __iter__(self):
        return iter(self.weights)

    def __getitem__(self, i: int) -> float:
        return self.weights[i]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights)


@dataclass(frozen=True)
class Gaussian1D:
    mean: float
    variance: float

    def __post_init__(self):
        if not self.variance > 0:
            raise ValueError(f"variance must be positive, got {self.variance}")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


@dataclass(frozen=True)
class TruthContext:
    theta: float

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise ValueError("theta must be finite")


@dataclass(frozen=True)
class MomentSummary:
    mean: float
    variance: float

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError(f"variance must be non-negative, got {self.variance}")


@dataclass(frozen=True)
class MseBreakdown:
    """MSE split into a variance-like and a squared-bias-like part.

    ``details`` carries named intermediates of closed forms (for example the
    precision shares of a GA fusion); it is informational only.
    """

    total: float
    variance_part: float
    bias_sq_part: float
    details: Mapping[str, float] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.variance_part < 0 or self.bias_sq_part < 0:
            raise ValueError("MSE parts must be non-negative")
        parts = self.variance_part + self.bias_sq_part
        if not math.isclose(self.total, parts, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(f"total {self.total} != variance + bias^2 = {parts}")


@dataclass(frozen=True, eq=False)
class GridDensity:
    """A density tabulated on a uniform grid over [x_min, x_max]."""

    x_min: float
    x_max: float
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 16:
            raise ValueError("grid density needs a 1-D array of at least 16 values")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("density values must be finite and non-negative")
        if not np.any(v > 0):
            raise ValueError("density has empty support")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n_points(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def support(self) -> np.ndarray:
        return self.values > 0

    def integral(self) -> float:
        return trapezoid(self.values, self.dx)

    @property
    def normalized(self) -> bool:
        return abs(self.integral() - 1.0) <= NORMALIZATION_TOL

    def same_grid(self, other: "GridDensity") -> bool:
        return (
            self.n_points == other.n_points
            and self.x_min == other.x_min
            and self.x_max == other.x_max
        )

    @classmethod
    def from_function(
        cls,
        f: Callable[[np.ndarray], np.ndarray],
        x_min: float,
        x_max: float,
        n_points: int = DEFAULT_GRID_POINTS,
    ) -> "GridDensity":
        x = np.linspace(x_min, x_max, n_points)
        return cls(x_min, x_max, np.asarray(f(x), dtype=float))

    @classmethod
    def gaussian(
        cls,
        g: Gaussian1D,
        x_min: float | None = None,
        x_max: float | None = None,
        n_points: int = DEFAULT_GRID_POINTS,
    ) -> "GridDensity":
        """Tabulate ``g``; the default range is the mean padded by six sigmas."""
        if x_min is None:
            x_min = g.mean - DEFAULT_PAD_SIGMAS * g.std
        if x_max is None:
            x_max = g.mean + DEFAULT_PAD_SIGMAS * g.std
        return cls.from_function(lambda x: gaussian_pdf(x, g.mean, g.variance), x_min, x_max, n_points)


def gaussian_pdf(x, mean, variance):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * (x - mean) ** 2 / variance) / np.sqrt(2.0 * np.pi * variance)


def trapezoid(y: np.ndarray, dx: float) -> float:
    y = np.asarray(y, dtype=float)
    return float(dx * (y.sum() - 0.5 * (y[0] + y[-1])))


def _require_normalized(d: GridDensity) -> float:
    mass = d.integral()
    if abs(mass - 1.0) > NORMALIZATION_TOL:
        raise ValueError(f"unnormalized density (integral {mass:.9g})")
    return mass


def moments_of_grid(d: GridDensity) -> MomentSummary:
    mass = _require_normalized(d)
    x = d.x
    # divide by the quadrature mass so the MSE identity holds to rounding
    mean = trapezoid(x * d.values, d.dx) / mass
    var = trapezoid((x - mean) ** 2 * d.values, d.dx) / mass
    return MomentSummary(mean, max(var, 0.0))


def mse_of_grid(d: GridDensity, truth: TruthContext) -> MseBreakdown:
    mass = _require_normalized(d)
    m = moments_of_grid(d)
    total = trapezoid((truth.theta - d.x) ** 2 * d.values, d.dx) / mass
    return MseBreakdown(total, m.variance, (m.mean - truth.theta) ** 2)


def as_weights(w: FusionWeights | Sequence[float]) -> FusionWeights:
    return w if isinstance(w, FusionWeights) else FusionWeights(tuple(w))
