"""Solvers for time-fractional substantial diffusion equations.

Second-order tempered Grunwald-Letnikov time stepping with fourth-order
compact space discretization, starting-weight corrections for nonsmooth
solutions, and a convergence-study harness with built-in reference tables.
"""

from .coeffs import (FracParams, StartingWeights, WeightTable, cumulative_l,
                     exponent_set, grunwald_coeffs, starting_weight_table,
                     starting_weights, substantial_weights)
from .errors import (ConditioningError, MeshMismatchError, OracleConvergenceError,
                     ParameterError, SingularMatrixError, StepFailureError,
                     SubdiffError)
from .fode import ScalarProblem, ScalarSolution, error_table_scalar, solve_scalar
from .harness import (Experiment, ExperimentResult, build_example,
                      compare_reference, named_experiments, run_experiment,
                      run_named)
from .operators import (Mesh1D, Mesh2D, TimeGrid, compact_average,
                        compact_average_1d, exact_power_derivative, grid_norms,
                        oracle_substantial_derivative, second_difference,
                        second_difference_1d, substantial_history_sum,
                        time_average)
from .pde1d import (Problem1D, SchemeConfig, Solution1D, solve_1d,
                    solve_1d_baseline, transform_initial)
from .pde2d import Problem2D, Scheme2D, Solution2D, assemble_2d, solve_2d
from .report import (ConvergenceReport, format_report_table, make_report,
                     read_report_csv, write_report_csv)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
