"""Minimum index-of-coincidence couplings of two discrete margins."""

from .core import (
    Coupling,
    Marginal,
    SignedMatrix,
    condition_h,
    independence_coupling,
    indeterminacy_coupling,
    index_of_coincidence,
    is_monotone,
    new_marginal,
    uniform_law,
)
from .errors import CouplingError
from .staircase import Certificate, Solution, solve, verify_kkt

__all__ = [
    "Certificate",
    "Coupling",
    "CouplingError",
    "Marginal",
    "SignedMatrix",
    "Solution",
    "condition_h",
    "independence_coupling",
    "indeterminacy_coupling",
    "index_of_coincidence",
    "is_monotone",
    "new_marginal",
    "solve",
    "uniform_law",
    "verify_kkt",
]

__version__ = "0.1.0"
