"""Numerical verification of sharp Hardy and Rellich inequalities on
nonreversible Finsler model spaces."""

__version__ = "0.1.0"

from .minkowski import MinkowskiNorm
from .models import (HyperbolicBall, RadialProfile, RadialTestFunction,
                     RandersFlat, SmoothCutoff, comparison_D, comparison_s,
                     euclidean_flat)
from .quadrature import QuadratureSpec

__all__ = [
    "MinkowskiNorm", "QuadratureSpec", "RandersFlat", "HyperbolicBall",
    "euclidean_flat", "RadialProfile", "RadialTestFunction", "SmoothCutoff",
    "comparison_s", "comparison_D", "__version__",
]
