"""Concentration of measure on l_p spheres and weighted random matrices.

Exact moment formulas, explicit tail certificates, samplers and Monte Carlo
experiments that compare empirical tails with the certified bounds.
"""
from .errors import ConclabError, ConfigurationError, DomainError
from .sampling import RngState

__version__ = "0.1.0"

__all__ = ["ConclabError", "ConfigurationError", "DomainError", "RngState", "__version__"]
