"""Scattering data, spectral shift functions and finite-size energies of
one-dimensional Schroedinger operators."""

__version__ = "0.1.0"
