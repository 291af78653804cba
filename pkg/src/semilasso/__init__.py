"""Sparse coefficient estimation in partially linear regression models.

The pipeline: kernel-smooth away the nonparametric component
(:mod:`semilasso.smoothing`), then solve the adaptive-lasso penalized least
squares problem through its dual with a semismooth-Newton augmented
Lagrangian method (:mod:`semilasso.ssnal` / :mod:`semilasso.ssn`) or the ADMM
baseline (:mod:`semilasso.admm`).  Weight construction and penalty-level
selection live in :mod:`semilasso.model_select`; synthetic scenarios and CSV
ingestion in :mod:`semilasso.datagen`; the experiment harness in
:mod:`semilasso.bench`.
"""

from . import errors
from .admm import AdmmOptions, admm_factorize, admm_solve
from .bench import (
    Metrics,
    Preset,
    PRESETS,
    emit_report,
    emit_support_dump,
    nnz_estimate,
    relative_error,
    run_csv_study,
    run_experiment,
)
from .datagen import CsvSchema, ScenarioSpec, SyntheticInstance, generate, load_csv
from .model_select import (
    LambdaPath,
    WeightSpec,
    adaptive_weights_highdim,
    adaptive_weights_lowdim,
    bic_score,
    lambda_grid,
    lasso_weights,
    select_lambda,
    solve_path,
    weights_from_pilot,
)
from .prox import moreau_gap, project_box, soft_threshold
from .smoothing import (
    KernelWeights,
    RawSample,
    TransformedProblem,
    epanechnikov_kernel,
    nadaraya_watson_weights,
    partial_residual_transform,
    recover_g,
    select_bandwidth_cv,
    spectral_norm,
    transform_sample,
)
from .ssn import InnerProblem, NewtonConfig, active_set, line_search, newton_direction, psi_gradient, psi_value, ssn_solve
from .ssnal import (
    DualState,
    SolveOptions,
    SolveReport,
    dual_objective,
    kkt_residual,
    primal_objective,
    recover_v,
    ssnal_solve,
    update_beta,
)

__version__ = "0.1.0"
