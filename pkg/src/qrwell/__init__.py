"""Quasi-relativistic particle in an infinite square well.

Natural units (hbar = c = m = 1) are used internally; the single remaining
parameter is the dimensionless half-width ``a_bar = m c a / hbar``.
"""
__version__ = "0.1.0"
