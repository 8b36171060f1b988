"""Exact computations around the permutation functional alpha_n of the dyadic kappa matrix."""

__version__ = "0.1.0"
