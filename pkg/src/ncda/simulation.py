"""Synthetic Gaussian benchmarks and the Monte-Carlo experiment engine.

Three experiment families over p-dimensional data with identity covariances
and a separation constant c:

* EXP1: class 1 ~ N(0, I), class 2 ~ N(c*1, I).
* EXP2: class 1 is an equal mixture of N(0, I) and N(2c*1, I); class 2 ~ N(c*1, I)
  sits between the two bumps.
* EXP3: both classes are equal two-component mixtures, with means (0, 2c*1)
  and (c*1, 3c*1).

Each trial draws a fresh training set of n points per class, fits the
requested classifiers, and scores them on a test set of test_per_class
points per class that is fixed across trials for a given (experiment, p).
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classifiers import (
    FitError,
    calibrate_sign,
    fit_lda,
    fit_ncc,
    fit_qda,
)
from .data import ClassId, Dataset, SeedSpec, derive_stream
from .geometry import SurfaceMode, containment_flags, region_from_flags

EXPERIMENT_IDS = ("EXP1", "EXP2", "EXP3")
CLASSIFIER_NAMES = ("NCC", "NCDA", "LDA", "QDA")
CALIBRATED_NCC = "NCC_CAL"  # extra series emitted when sign calibration is on


@dataclass(frozen=True)
class GaussianComponent:
    """One multivariate normal: mean vector plus SPD covariance."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float).ravel()
        cov = np.asarray(self.covariance, dtype=float)
        if cov.shape != (mean.size, mean.size):
            raise ValueError("covariance shape does not match the mean length")
        if not np.allclose(cov, cov.T):
            raise ValueError("covariance must be symmetric")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class MixtureSpec:
    """Finite Gaussian mixture with weights summing to one."""

    components: tuple[GaussianComponent, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.components:
            raise ValueError("a mixture needs at least one component")
        if len(self.weights) != len(self.components):
            raise ValueError("one weight per component required")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1")
        dims = {c.dim for c in self.components}
        if len(dims) != 1:
            raise ValueError("all components must share one dimension")

    @property
    def dim(self) -> int:
        return self.components[0].dim


def sample_gaussian(
    component: GaussianComponent, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw `count` points as mean + L z with L the Cholesky factor."""
    if count < 0:
        raise ValueError("count must be non-negative")
    chol = np.linalg.cholesky(component.covariance)
    z = rng.standard_normal((count, component.dim))
    return component.mean + z @ chol.T


def sample_mixture(
    spec: MixtureSpec, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw from the mixture: pick components by weight, then sample each.

    When some weight equals 1 the choice is forced, so no selection
    randomness is consumed and the draws match sample_gaussian on the same
    stream exactly.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    for comp, w in zip(spec.components, spec.weights):
        if w == 1.0:
            return sample_gaussian(comp, count, rng)
    idx = rng.choice(len(spec.components), size=count, p=np.asarray(spec.weights))
    z = rng.standard_normal((count, spec.dim))
    out = np.empty((count, spec.dim))
    for k, comp in enumerate(spec.components):
        mask = idx == k
        if mask.any():
            chol = np.linalg.cholesky(comp.covariance)
            out[mask] = comp.mean + z[mask] @ chol.T
    return out


def experiment_mixtures(
    experiment_id: str, p: int, c: float
) -> tuple[MixtureSpec, MixtureSpec]:
    """The two class distributions for one experiment at dimension p."""
    if experiment_id not in EXPERIMENT_IDS:
        raise ValueError(f"unknown experiment {experiment_id!r}")
    eye = np.eye(p)
    ones = np.ones(p)

    def normal(scale: float) -> GaussianComponent:
        return GaussianComponent(scale * c * ones, eye)

    if experiment_id == "EXP1":
        f1 = MixtureSpec((normal(0.0),), (1.0,))
        f2 = MixtureSpec((normal(1.0),), (1.0,))
    elif experiment_id == "EXP2":
        f1 = MixtureSpec((normal(0.0), normal(2.0)), (0.5, 0.5))
        f2 = MixtureSpec((normal(1.0),), (1.0,))
    else:
        f1 = MixtureSpec((normal(0.0), normal(2.0)), (0.5, 0.5))
        f2 = MixtureSpec((normal(1.0), normal(3.0)), (0.5, 0.5))
    return f1, f2


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines one Monte-Carlo run, including its seed."""

    experiment_id: str = "EXP1"
    c: float = 1.0
    dims: tuple[int, ...] = (2, 4, 8, 16)
    train_sizes: tuple[int, ...] = (10, 20, 40, 80, 160, 200)
    trials: int = 1000
    test_per_class: int = 1000
    classifiers: tuple[str, ...] = CLASSIFIER_NAMES
    surface_mode: SurfaceMode = SurfaceMode.ADJACENT_PAIR_HULL
    max_depth: int = 8
    base_seed: int = 1234567890
    sign_calibration: bool = False

    def __post_init__(self) -> None:
        if self.experiment_id not in EXPERIMENT_IDS:
            raise ValueError(f"unknown experiment {self.experiment_id!r}")
        if self.c <= 0:
            raise ValueError("separation c must be positive")
        if not self.dims or any(p < 1 for p in self.dims):
            raise ValueError("dims must be positive integers")
        if not self.train_sizes or any(n < 1 for n in self.train_sizes):
            raise ValueError("train_sizes must be positive integers")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.test_per_class < 1:
            raise ValueError("test_per_class must be at least 1")
        if not self.classifiers:
            raise ValueError("at least one classifier required")
        unknown = set(self.classifiers) - set(CLASSIFIER_NAMES)
        if unknown:
            raise ValueError(f"unknown classifiers: {sorted(unknown)}")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")

    @property
    def series_names(self) -> tuple[str, ...]:
        names = tuple(self.classifiers)
        if self.sign_calibration and "NCC" in names:
            names = names + (CALIBRATED_NCC,)
        return names


@dataclass(frozen=True)
class SummaryRow:
    """Mean and sample standard deviation of the error over the used trials."""

    experiment: str
    classifier: str
    p: int
    n: int
    mean_err: float
    std_err: float
    trials: int
    degenerate_std: bool = field(default=False, compare=False)


def make_test_set(
    config: ExperimentConfig, p: int
) -> tuple[np.ndarray, np.ndarray]:
    """The fixed evaluation sample for (experiment, p), shared by every trial."""
    f1, f2 = experiment_mixtures(config.experiment_id, p, config.c)
    rng = derive_stream(
        SeedSpec(config.base_seed, config.experiment_id, p, 0, 0, "test")
    )
    m = config.test_per_class
    features = np.vstack([sample_mixture(f1, m, rng), sample_mixture(f2, m, rng)])
    labels = np.concatenate(
        [np.full(m, int(ClassId.OMEGA1)), np.full(m, int(ClassId.OMEGA2))]
    )
    return features, labels


def make_training_set(
    config: ExperimentConfig, p: int, n: int, trial_index: int
) -> Dataset:
    """Training draw for one trial: n points per class."""
    f1, f2 = experiment_mixtures(config.experiment_id, p, config.c)
    rng = derive_stream(
        SeedSpec(config.base_seed, config.experiment_id, p, n, trial_index, "train")
    )
    features = np.vstack([sample_mixture(f1, n, rng), sample_mixture(f2, n, rng)])
    labels = np.concatenate(
        [np.full(n, int(ClassId.OMEGA1)), np.full(n, int(ClassId.OMEGA2))]
    )
    return Dataset(features, labels)


def run_trial(
    config: ExperimentConfig, p: int, n: int, trial_index: int
) -> dict[str, float | None]:
    """One Monte-Carlo trial: fit every requested classifier, score on the
    fixed test set.  A classifier that fails to fit yields None for this
    trial instead of aborting the run."""
    train = make_training_set(config, p, n, trial_index)
    test_x, test_y = make_test_set(config, p)
    names = config.series_names

    need_ncc = bool({"NCC", "NCDA", CALIBRATED_NCC} & set(names))
    need_lda = bool({"LDA", "NCDA"} & set(names))

    ncc = lda = None
    ncc_failure = lda_failure = None
    if need_ncc:
        try:
            ncc = fit_ncc(train, config.surface_mode, ClassId.OMEGA1, config.max_depth)
        except (FitError, ValueError, np.linalg.LinAlgError) as exc:
            ncc_failure = exc
    if need_lda:
        try:
            lda = fit_lda(train)
        except (FitError, ValueError, np.linalg.LinAlgError) as exc:
            lda_failure = exc

    def err(preds: np.ndarray) -> float:
        return float(np.mean(preds != test_y))

    # Shell membership flags are shared by NCC, NCDA and the calibrated
    # variant; computing them once per trial matches the models' own
    # predict paths exactly.
    member = lda_preds = None
    flags = np.empty((0, 0))
    if ncc is not None:
        flags = containment_flags(ncc.stack, test_x)
        member = region_from_flags(flags)
    if lda is not None:
        lda_preds = lda.predict_many(test_x)

    def cavity_preds(flip: bool) -> np.ndarray:
        owner = ncc.stack.outer_owner
        return np.where(member != flip, int(owner), int(owner.other))

    results: dict[str, float | None] = {}
    for name in names:
        try:
            if name == "NCC":
                results[name] = None if member is None else err(cavity_preds(False))
            elif name == "LDA":
                results[name] = None if lda_preds is None else err(lda_preds)
            elif name == "QDA":
                results[name] = err(fit_qda(train).predict_many(test_x))
            elif name == "NCDA":
                if member is None or lda_preds is None:
                    results[name] = None
                else:
                    results[name] = err(
                        np.where(flags[0], cavity_preds(False), lda_preds)
                    )
            elif name == CALIBRATED_NCC:
                if member is None:
                    results[name] = None
                else:
                    flipped = calibrate_sign(
                        train,
                        mode=config.surface_mode,
                        max_depth=config.max_depth,
                    )
                    results[name] = err(cavity_preds(flipped))
        except (FitError, ValueError, np.linalg.LinAlgError):
            results[name] = None
    return results


def _trial_task(args: tuple[ExperimentConfig, int, int, int]) -> dict[str, float | None]:
    config, p, n, trial_index = args
    return run_trial(config, p, n, trial_index)


def run_experiment(config: ExperimentConfig, workers: int = 1) -> list[SummaryRow]:
    """Run the full (p, n, trial) grid and summarize per classifier and cell.

    Results are reproducible bit-for-bit for a given config regardless of
    the worker count, because every trial derives its own random streams.
    """
    cells = [(p, n) for p in config.dims for n in config.train_sizes]
    tasks = [(config, p, n, t) for p, n in cells for t in range(config.trials)]
    if workers > 1:
        chunk = max(1, len(tasks) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_trial_task, tasks, chunksize=chunk))
    else:
        outcomes = [_trial_task(task) for task in tasks]

    per_cell: dict[tuple[int, int], list[dict[str, float | None]]] = {
        cell: [] for cell in cells
    }
    for (_, p, n, _), outcome in zip(tasks, outcomes):
        per_cell[(p, n)].append(outcome)

    rows: list[SummaryRow] = []
    for name in config.series_names:
        for p, n in cells:
            errs = [o[name] for o in per_cell[(p, n)] if o[name] is not None]
            if not errs:
                raise RuntimeError(
                    f"{name} failed to fit in every trial at p={p}, n={n}"
                )
            arr = np.asarray(errs)
            degenerate = arr.size < 2
            rows.append(
                SummaryRow(
                    experiment=config.experiment_id,
                    classifier=name,
                    p=p,
                    n=n,
                    mean_err=float(arr.mean()),
                    std_err=0.0 if degenerate else float(arr.std(ddof=1)),
                    trials=int(arr.size),
                    degenerate_std=degenerate,
                )
            )
    return rows


def bayes_error_exp1(p: int, c: float) -> float:
    """Minimal achievable error for the EXP1 pair: Phi(-c*sqrt(p)/2)."""
    if p < 1:
        raise ValueError("p must be at least 1")
    if c < 0:
        raise ValueError("c must be non-negative")
    return 0.5 * math.erfc(c * math.sqrt(p) / (2.0 * math.sqrt(2.0)))
