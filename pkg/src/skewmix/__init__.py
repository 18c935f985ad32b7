"""Numerical laboratory for locally constant SU(2) extensions of the full shift.

The package builds averaging (Hecke) operators from a finite symmetric
generator set, estimates their per-block spectral norms, computes exact and
Monte Carlo correlation functions of the skew product, and tests the central
limit theorem for Birkhoff sums.  A FastAPI service exposes the experiments;
the command line client drives them locally or against a remote server.
"""

__version__ = "0.1.0"
