"""Generalized Dirac brackets with exact polynomial algebra and numeric verification."""
import logging

from .dirac import (DiracError, DiracSystem, DSolution, ObstructionError, ResidualError,
                    build_dirac_matrix, check_kernel_condition, compute_C, perturb_D,
                    perturbation_space, same_jstar, solve_D)
from .dynamics import Trajectory, integrate
from .kernels import BACKEND
from .phase import (ConstraintSet, PhaseSpace, PoissonStructure, bracket, build_structure,
                    canonical_structure, jacobiator)
from .poly import PolyExpr, format_poly, parse_poly, poly_arith, poly_diff, poly_eval
from .problem import ProblemError, ProblemFile, load_problem
from .verify import VerificationReport, check_counterexample_semantics, verify_system

logging.getLogger(__name__).addHandler(logging.NullHandler())

__version__ = "0.1.0"
__all__ = [
    "BACKEND", "ConstraintSet", "DSolution", "DiracError", "DiracSystem", "ObstructionError",
    "PhaseSpace", "PoissonStructure", "PolyExpr", "ProblemError", "ProblemFile", "ResidualError",
    "Trajectory", "VerificationReport", "bracket", "build_dirac_matrix", "build_structure",
    "canonical_structure", "check_counterexample_semantics", "check_kernel_condition",
    "compute_C", "format_poly", "integrate", "jacobiator", "load_problem", "parse_poly",
    "perturb_D", "perturbation_space", "poly_arith", "poly_diff", "poly_eval", "same_jstar",
    "solve_D", "verify_system",
]
