"""Equilateral restricted four-body problem with Birkhoff regularization."""

__version__ = "0.1.0"
