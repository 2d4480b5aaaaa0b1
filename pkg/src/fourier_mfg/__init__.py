"""Fourier MFG - Fourier-truncated mean field games and control on the torus."""

__version__ = "0.3.0"
