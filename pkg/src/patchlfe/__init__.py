"""Patchwise local Fourier extension approximation on curved 2-D domains."""

__version__ = "0.1.0"
