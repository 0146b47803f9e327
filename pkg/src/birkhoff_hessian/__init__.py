"""Birkhoff pseudospectral discretization of a scalar optimal control problem,
its structured KKT (Hessian) system, Newton solves and Gershgorin spectral checks."""

from .birkhoff import BirkhoffOperators, apply_Ba_fast, apply_Bb_fast, build_operators, lemma1_residual
from .complexity import memory_estimate, table1_row
from .grid import Grid, GridFamily, GridSpec, grid, make_grid, quadrature_exactness_degree
from .kkt import (
    DecisionVector,
    KktMatrix,
    SplitKkt,
    assemble,
    assemble_alt,
    matvec,
    nnz_report,
    permute_split,
    residual,
    to_dense,
)
from .model import OcpProblem, builtin_problem, check_derivatives, endpoint_eval, hamiltonian_eval
from .solver import SolverOptions, SolveReport, initial_guess, krylov_linear_solve, newton_solve, verify_solution
from .spectral import dense_spectrum, gershgorin_discs, spectral_radius_sweep, verify_theorem1, weak_form_amplification

__version__ = "0.1.0"
