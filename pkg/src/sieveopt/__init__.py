"""Sparse convex composite solvers with adaptive index-set sieving."""

from .model import (
    Criterion,
    ElasticNet,
    ExclusiveLasso,
    GroupPartition,
    IndexSet,
    Lasso,
    LossKind,
    ProblemData,
    Regularizer,
    SieveConfig,
    Slope,
    SparseGroupLasso,
    embed,
    evaluate_regularizer,
    extract,
    restrict_regularizer,
)
from .losses import (
    LossEval,
    evaluate_loss,
    lipschitz_bound,
    loss_gradient_y,
    loss_value,
    phi_gradient,
)
from .prox import block_soft, prox, prox_optimality_gap, soft_threshold
from .residual import ResidualReport, criterion_value, objective, residual
from .inner import Backend, InnerConfig, InnerResult, solve_reduced
from .sieve import (
    RoundRecord,
    SieveConsistencyError,
    SieveReport,
    TerminatedBy,
    expand_index_set,
    initial_index_set,
    sieve_solve,
)
from .path import (
    LambdaGrid,
    PathEntry,
    PathReport,
    UnsupportedOperationError,
    generate_path,
    lambda_grid_log10,
    ssr_screen_lasso,
    warmstart_path,
)
from .data_io import (
    SyntheticSpec,
    gen_synthetic,
    path_report_dict,
    read_bundle,
    read_groups,
    read_libsvm,
    read_matrix,
    read_report,
    write_bundle,
    write_groups,
    write_libsvm,
    write_matrix,
    write_report,
)

__version__ = "0.1.0"

__all__ = [
    "Backend",
    "Criterion",
    "ElasticNet",
    "ExclusiveLasso",
    "GroupPartition",
    "IndexSet",
    "InnerConfig",
    "InnerResult",
    "LambdaGrid",
    "Lasso",
    "LossEval",
    "LossKind",
    "PathEntry",
    "PathReport",
    "ProblemData",
    "Regularizer",
    "ResidualReport",
    "RoundRecord",
    "SieveConfig",
    "SieveConsistencyError",
    "SieveReport",
    "Slope",
    "SparseGroupLasso",
    "SyntheticSpec",
    "TerminatedBy",
    "UnsupportedOperationError",
    "block_soft",
    "criterion_value",
    "embed",
    "evaluate_loss",
    "evaluate_regularizer",
    "expand_index_set",
    "extract",
    "gen_synthetic",
    "generate_path",
    "initial_index_set",
    "lambda_grid_log10",
    "lipschitz_bound",
    "loss_gradient_y",
    "loss_value",
    "objective",
    "path_report_dict",
    "phi_gradient",
    "prox",
    "prox_optimality_gap",
    "read_bundle",
    "read_groups",
    "read_libsvm",
    "read_matrix",
    "read_report",
    "residual",
    "restrict_regularizer",
    "sieve_solve",
    "solve_reduced",
    "ssr_screen_lasso",
    "warmstart_path",
    "write_bundle",
    "write_groups",
    "write_libsvm",
    "write_matrix",
    "write_report",
]
