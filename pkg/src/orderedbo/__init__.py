"""Ordering-aware multi-objective Bayesian optimization.

Zero-inflated surrogates (a Gaussian-process classifier for the zero
mode times a Gaussian-process regressor for the magnitude), a DAG of
objectives that gates posterior samples, batched noisy expected
hypervolume improvement over those samples, and a reproducible campaign
harness with two synthetic testbeds.
"""

from .acquisition import (
    AcquisitionContext,
    prepare_context,
    qnehvi,
    qnehvi_of_samples,
    select_batch,
    select_random,
)
from .dag import CycleError, PropertyDag, build_dag, gated_betas, resample
from .gp import (
    ClassifierFitConfig,
    ConvergenceError,
    GpClassifier,
    GpRegressor,
    IllConditionedKernelError,
    RegressorFitConfig,
    fit_classifier,
    fit_regressor,
    lml_and_grad,
    matern52,
)
from .harness import (
    MODES,
    CampaignConfig,
    CampaignRecord,
    ConfigError,
    IterationRecord,
    export_results,
    joint_positive_count,
    log_posterior_density,
    run_campaign,
    summarize_results,
)
from .pareto import (
    DimensionError,
    EmptyArchiveError,
    McHypervolume,
    ParetoArchive,
    UnsupportedDimensionError,
    dominates,
    hvi,
    hypervolume,
    hypervolume_mc,
    non_dominated_mask,
    pareto_front,
)
from .testbeds import (
    TESTBED_NAMES,
    DomainError,
    Observation,
    SimulationError,
    Testbed,
    branin_currin,
    calibrate,
    get_testbed,
    penicillin_simulate,
)
from .zero_inflated import (
    JointPosteriorDraw,
    ObjectiveKind,
    ObservationSet,
    SurrogateConfig,
    ZeroInflatedSurrogate,
    draw_joint,
    fit_surrogates,
    zero_inflated_density,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "AcquisitionContext", "prepare_context", "qnehvi", "qnehvi_of_samples",
    "select_batch", "select_random",
    "CycleError", "PropertyDag", "build_dag", "gated_betas", "resample",
    "ClassifierFitConfig", "ConvergenceError", "GpClassifier", "GpRegressor",
    "IllConditionedKernelError", "RegressorFitConfig", "fit_classifier",
    "fit_regressor", "lml_and_grad", "matern52",
    "MODES", "CampaignConfig", "CampaignRecord", "ConfigError",
    "IterationRecord", "export_results", "joint_positive_count",
    "log_posterior_density", "run_campaign", "summarize_results",
    "DimensionError", "EmptyArchiveError", "McHypervolume", "ParetoArchive",
    "UnsupportedDimensionError", "dominates", "hvi", "hypervolume",
    "hypervolume_mc", "non_dominated_mask", "pareto_front",
    "TESTBED_NAMES", "DomainError", "Observation", "SimulationError",
    "Testbed", "branin_currin", "calibrate", "get_testbed",
    "penicillin_simulate",
    "JointPosteriorDraw", "ObjectiveKind", "ObservationSet",
    "SurrogateConfig", "ZeroInflatedSurrogate", "draw_joint",
    "fit_surrogates", "zero_inflated_density",
]
