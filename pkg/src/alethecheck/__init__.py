"""Checker, elaborator and pruner for Alethe SMT proofs."""

from .checker import CheckReport, StrictnessConfig, check_proof
from .elaborator import ElaborationResult, elaborate_proof, elaborate_trans, prune
from .errors import AletheError
from .frontend import Problem, parse_problem, parse_proof
from .printer import print_proof

__all__ = [
    "AletheError",
    "CheckReport",
    "ElaborationResult",
    "Problem",
    "StrictnessConfig",
    "check_proof",
    "elaborate_proof",
    "elaborate_trans",
    "parse_problem",
    "parse_proof",
    "print_proof",
    "prune",
]
