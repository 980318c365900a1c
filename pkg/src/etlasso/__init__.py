"""Lasso tuning with permuted pseudo-features, plus BIC and CV baselines."""

from .baselines import CriterionTrace, bic_select, cv_select
from .lasso_path import (
    DesignMatrix,
    GridSpec,
    LambdaGrid,
    LassoPath,
    Response,
    entry_values,
    fit_path,
    kkt_violation,
    lambda_max,
    make_grid,
    path_grid,
    standardize,
)
from .selection import (
    PermutationPlan,
    SelectionResult,
    et_lasso_select,
    mutual_incoherence,
    permute_rows,
    refit_ols,
    stage_select,
)

__version__ = "0.1.0"

__all__ = [
    "CriterionTrace",
    "DesignMatrix",
    "GridSpec",
    "LambdaGrid",
    "LassoPath",
    "PermutationPlan",
    "Response",
    "SelectionResult",
    "bic_select",
    "cv_select",
    "entry_values",
    "et_lasso_select",
    "fit_path",
    "kkt_violation",
    "lambda_max",
    "make_grid",
    "mutual_incoherence",
    "path_grid",
    "permute_rows",
    "refit_ols",
    "stage_select",
    "standardize",
]
