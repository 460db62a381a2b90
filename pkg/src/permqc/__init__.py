"""Permutational quantum computation in constant-excitation subspaces."""

__version__ = "0.1.0"
