"""Perturbed Hammerstein equations with discontinuous nonlinearities: checks and eigenpairs."""

__version__ = "0.1.0"
