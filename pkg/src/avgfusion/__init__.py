"""Arithmetic versus geometric averaging for estimates, densities and Gaussian mixtures."""
from avgfusion.core import (
    FusionWeights,
    Gaussian1D,
    GridDensity,
    MomentSummary,
    MseBreakdown,
    TruthContext,
)
from avgfusion.gmfusion import ExtractionRule, GaussianComponent, GaussianMixture, ReductionConfig

__version__ = "0.1.0"

__all__ = [
    "ExtractionRule",
    "FusionWeights",
    "Gaussian1D",
    "GaussianComponent",
    "GaussianMixture",
    "GridDensity",
    "MomentSummary",
    "MseBreakdown",
    "ReductionConfig",
    "TruthContext",
    "__version__",
]
