"""Effective conductivity of doubly periodic composites with circular
inclusions: lattice kernels, structural sums, series expansions, a direct
functional-equation solver and Monte Carlo ensemble averaging."""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    DependencyError,
    DomainError,
    EffcondError,
    GenerationError,
    InvalidCellError,
    KernelOrderError,
    NearSingularityError,
)
from .lattice import Cell, eisenstein, eisenstein_regularized, lattice_sum, make_cell
from .geometry import (
    DiskConfiguration,
    EnsembleDescriptor,
    load_configuration,
    periodic_distance,
    periodic_reduce,
    regular_array,
    rsa_generate,
    save_configuration,
    trial_seed,
)
from .esums import (
    MultiIndex,
    esum,
    esum_nn,
    esum_reference,
    kernel_matrix,
    required_indices,
)
from .series import (
    ClusterCoefficients,
    EffectiveResult,
    a13,
    cluster_coeffs,
    lambda_cluster,
    lambda_contrast,
    lambda_dilute,
    lambda_pade,
    zeta1,
)
from .solver import (
    SolverParams,
    SolveResult,
    TaylorField,
    apply_W,
    cluster_terms_exact,
    constant_field,
    shape_factor,
    solve_contrast,
)
from .pipeline import (
    EnsembleStats,
    compare_methods,
    parse_quantity,
    run_ensemble,
    write_run,
)

__all__ = [
    "Cell",
    "ClusterCoefficients",
    "ConvergenceError",
    "DependencyError",
    "DiskConfiguration",
    "DomainError",
    "EffcondError",
    "EffectiveResult",
    "EnsembleDescriptor",
    "EnsembleStats",
    "GenerationError",
    "InvalidCellError",
    "KernelOrderError",
    "MultiIndex",
    "NearSingularityError",
    "SolveResult",
    "SolverParams",
    "TaylorField",
    "a13",
    "apply_W",
    "cluster_coeffs",
    "cluster_terms_exact",
    "compare_methods",
    "constant_field",
    "eisenstein",
    "eisenstein_regularized",
    "esum",
    "esum_nn",
    "esum_reference",
    "kernel_matrix",
    "lambda_cluster",
    "lambda_contrast",
    "lambda_dilute",
    "lambda_pade",
    "lattice_sum",
    "load_configuration",
    "make_cell",
    "parse_quantity",
    "periodic_distance",
    "periodic_reduce",
    "regular_array",
    "required_indices",
    "rsa_generate",
    "run_ensemble",
    "save_configuration",
    "shape_factor",
    "solve_contrast",
    "trial_seed",
    "write_run",
    "zeta1",
]
