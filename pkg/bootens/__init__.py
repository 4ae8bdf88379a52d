"""Confidence and prediction intervals from bootstrapped deep ensembles."""
from ._version import __version__

__all__ = ["__version__"]
