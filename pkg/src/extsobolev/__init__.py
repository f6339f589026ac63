"""Harmonic analysis for the Dirichlet Laplacian outside the unit ball.

Heat kernels, Weber-Orr / Hankel spectral transforms, Littlewood-Paley
square functions, Riesz potentials, Hardy inequalities, and the two
norm-equivalence counterexamples, with a CLI experiment runner.
"""

__version__ = "0.1.0"
