"""Numerical laboratory for 1D Anderson models with heavy-tailed disorder."""

from andersonlab.rng import SeedSpec
from andersonlab.distributions import DistributionSpec, parse_distribution
from andersonlab.signedlog import SignedLog

__version__ = "0.1.0"

__all__ = ["SeedSpec", "DistributionSpec", "parse_distribution", "SignedLog", "__version__"]
