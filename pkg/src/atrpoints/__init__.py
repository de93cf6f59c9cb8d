"""Geodesic-cycle point search on elliptic curves over real quadratic fields.

Exact arithmetic in F = Q(sqrt(D)) and quadratic extensions K = F(sqrt(delta)),
Hecke eigenvalue tables, period lattices, a Fourier-series double integrator
along closed geodesics, algebraic point recognition, a local sign calculus,
Bruhat-Tits tree combinatorics, and a height-coefficient scan.
"""

__version__ = "0.1.0"
