"""Nested cavity classifiers, discriminant baselines, and a Monte-Carlo
benchmark harness with parallel-coordinates figures."""

from .classifiers import (
    LdaModel,
    NcdaModel,
    NccModel,
    QdaModel,
    RegularizationLadder,
    calibrate_sign,
    fit_lda,
    fit_ncc,
    fit_ncda,
    fit_qda,
    load_model,
    save_model,
)
from .data import (
    ClassId,
    Dataset,
    Observation,
    SeedSpec,
    derive_stream,
    load_dataset,
    save_dataset,
    split_by_class,
)
from .geometry import (
    CavityStack,
    Hull2D,
    Polyline,
    Surface,
    SurfaceMode,
    build_cavities,
    contains,
    contains_many,
    convex_hull_2d,
    region_membership,
    region_membership_many,
    to_polyline,
    wrap,
)
from .simulation import (
    ExperimentConfig,
    GaussianComponent,
    MixtureSpec,
    SummaryRow,
    bayes_error_exp1,
    experiment_mixtures,
    run_experiment,
    run_trial,
    sample_gaussian,
    sample_mixture,
)

__all__ = [
    "CavityStack",
    "ClassId",
    "Dataset",
    "ExperimentConfig",
    "GaussianComponent",
    "Hull2D",
    "LdaModel",
    "MixtureSpec",
    "NcdaModel",
    "NccModel",
    "Observation",
    "Polyline",
    "QdaModel",
    "RegularizationLadder",
    "SeedSpec",
    "SummaryRow",
    "Surface",
    "SurfaceMode",
    "bayes_error_exp1",
    "build_cavities",
    "calibrate_sign",
    "contains",
    "contains_many",
    "convex_hull_2d",
    "derive_stream",
    "experiment_mixtures",
    "fit_lda",
    "fit_ncc",
    "fit_ncda",
    "fit_qda",
    "load_dataset",
    "load_model",
    "region_membership",
    "region_membership_many",
    "run_experiment",
    "run_trial",
    "sample_gaussian",
    "sample_mixture",
    "save_dataset",
    "save_model",
    "split_by_class",
    "to_polyline",
    "wrap",
]
