"""Solvers, checkers and samplers for Fourier-truncated mean field games."""
