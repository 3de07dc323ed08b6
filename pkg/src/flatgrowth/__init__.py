"""Flat chains, fractal growth and conformal evolution toolkit."""
from flatgrowth.chains import (
    EPS_GEOM,
    ChainError,
    DimensionMismatch,
    PolyhedralChain,
    Simplex,
    boundary,
    combine,
    mass,
    subdivide,
)

__all__ = [
    "EPS_GEOM",
    "ChainError",
    "DimensionMismatch",
    "PolyhedralChain",
    "Simplex",
    "boundary",
    "combine",
    "mass",
    "subdivide",
]
__version__ = "0.1.0"
