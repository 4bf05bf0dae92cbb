"""Zeroth-order optimization with compressed-sensing gradient estimates.

The main entry point is :func:`zoro_fa`, which adapts sparsity, sampling
radius, step size and query count together and falls back to forward
differences when sparse recovery stops paying off.
"""
from .bench import (
    CompressibilityProfile,
    DataProfile,
    ProblemSpec,
    RunResult,
    Solver,
    compressibility_profile,
    convergence_test,
    data_profile,
    run_suite,
    write_csv,
)
from .cosamp import CosampConfig, SparseEstimate, cosamp, halting_iterations, least_squares_on_support, top_k
from .errors import (
    BudgetExhausted,
    ConfigInfeasible,
    DimensionMismatch,
    DomainError,
    GateViolation,
    IncompatibleDimension,
    MissingCoverage,
    NoAnalyticGradient,
    TooManyRows,
    UnknownProblem,
)
from .gradest import GradEstimate, compressibility_tail_bounds, cs_gradient, effective_sparsity, fd_gradient
from .optimizers import IterateRecord, Trajectory, ZoroFaConfig, fd_descent, theoretical_inner_bound, zoro_fa, zoro_fixed
from .oracle import CountingOracle, Objective
from .sensing import RademacherBank, c0, c1, empirical_rip_check, gamma, measure, sample_bank, sensing_matrix
from .testfns import TestProblem, get_problem, max_s_squared, mgh_problem, nesterov_worst, quadratic, sparse_benchmark_start

__version__ = "0.1.0"
