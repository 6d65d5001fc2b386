"""Eigenvalues and closed-form spectral bounds for non-local Schrodinger operators."""

__version__ = "0.1.0"
