"""Exact-arithmetic tools for sum-of-squares certificates and their coefficient sizes."""

from .poly import Polynomial, monomial_basis
from .systems import ConstraintSystem, SolutionSet, enumerate_solutions, make_system

__all__ = [
    "ConstraintSystem",
    "Polynomial",
    "SolutionSet",
    "enumerate_solutions",
    "make_system",
    "monomial_basis",
]
