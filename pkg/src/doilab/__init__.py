"""Numerical laboratory for double operator integrals on commuting Hermitian tuples."""

__version__ = "0.1.0"
