"""The four classification rules behind one fit/predict contract.

NCC predicts the outer owner inside the union of odd-depth shells and the
other class everywhere else, so anything beyond the outermost shell defaults
to class 2.  NCDA keeps the NCC verdict inside the outer shell and hands
everything outside it to a linear discriminant trained on the same data.
LDA and QDA are the usual Gaussian discriminants with pooled and per-class
covariance estimates, made singularity-proof by a deterministic diagonal
loading ladder.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .data import ClassId, Dataset
from .geometry import (
    CavityStack,
    Hull2D,
    PairPanel,
    Surface,
    SurfaceMode,
    build_cavities,
    contains_many,
    region_membership_many,
)

MODEL_FORMAT_VERSION = 1


class FitError(RuntimeError):
    """A model could not be fitted (e.g. the covariance ladder ran out)."""


class ModelFormatError(ValueError):
    """A persisted model file is malformed or has the wrong version."""


@dataclass(frozen=True)
class RegularizationLadder:
    """Diagonal loading schedule: lambda = base_scale * mean-variance, escalating
    by `factor` up to `steps` attempts until the Cholesky factorization succeeds."""

    base_scale: float = 1e-6
    factor: float = 10.0
    steps: int = 6


DEFAULT_LADDER = RegularizationLadder()


def _regularize_spd(
    cov: np.ndarray, ladder: RegularizationLadder
) -> tuple[np.ndarray, float, float]:
    """Return (precision, log-determinant, lambda) of cov + lambda*I.

    lambda starts at base_scale * trace/p (with a unit floor when the trace
    vanishes, e.g. a zero-variance class) and escalates until the matrix
    factorizes.
    """
    p = cov.shape[0]
    trace = float(np.trace(cov))
    unit = trace / p if trace > 0.0 else 1.0
    lam = ladder.base_scale * unit
    for _ in range(ladder.steps):
        reg = cov + lam * np.eye(p)
        try:
            chol = np.linalg.cholesky(reg)
        except np.linalg.LinAlgError:
            lam *= ladder.factor
            continue
        log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
        precision = np.linalg.inv(reg)
        precision = (precision + precision.T) / 2.0
        return precision, log_det, lam
    raise FitError(
        f"covariance factorization failed after {ladder.steps} ladder steps"
    )


def _scatter(x: np.ndarray) -> np.ndarray:
    """Sum of outer products of deviations from the sample mean (no divisor)."""
    centered = x - x.mean(axis=0)
    return centered.T @ centered


@dataclass(frozen=True)
class NccModel:
    """Nested-cavity rule: the outer owner's class iff the query lies in the
    odd-shell region, optionally inverted when sign calibration decided the
    rule points the wrong way."""

    stack: CavityStack
    flipped: bool = False

    name = "NCC"

    @property
    def dim(self) -> int:
        return self.stack.dim

    def predict_many(self, points: np.ndarray) -> np.ndarray:
        member = region_membership_many(self.stack, points)
        if self.flipped:
            member = ~member
        owner = self.stack.outer_owner
        return np.where(member, int(owner), int(owner.other))

    def predict(self, x: np.ndarray) -> ClassId:
        return ClassId(int(self.predict_many(np.asarray(x).reshape(1, -1))[0]))


@dataclass(frozen=True)
class LdaModel:
    """Linear discriminant with pooled covariance; ties go to class 1."""

    mean1: np.ndarray
    mean2: np.ndarray
    pooled_precision: np.ndarray
    log_prior_ratio: float

    name = "LDA"

    @property
    def dim(self) -> int:
        return self.mean1.shape[0]

    def scores(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        direction = self.pooled_precision @ (self.mean1 - self.mean2)
        mid = (self.mean1 + self.mean2) / 2.0
        return (pts - mid) @ direction + self.log_prior_ratio

    def predict_many(self, points: np.ndarray) -> np.ndarray:
        return np.where(
            self.scores(points) >= 0.0, int(ClassId.OMEGA1), int(ClassId.OMEGA2)
        )

    def predict(self, x: np.ndarray) -> ClassId:
        return ClassId(int(self.predict_many(np.asarray(x).reshape(1, -1))[0]))


@dataclass(frozen=True)
class QdaModel:
    """Quadratic discriminant with per-class covariance; ties go to class 1."""

    mean1: np.ndarray
    mean2: np.ndarray
    precision1: np.ndarray
    precision2: np.ndarray
    log_det1: float
    log_det2: float
    log_prior1: float
    log_prior2: float

    name = "QDA"

    @property
    def dim(self) -> int:
        return self.mean1.shape[0]

    def _delta(
        self,
        pts: np.ndarray,
        mean: np.ndarray,
        precision: np.ndarray,
        log_det: float,
        log_prior: float,
    ) -> np.ndarray:
        centered = pts - mean
        quad = np.einsum("ij,jk,ik->i", centered, precision, centered)
        return -0.5 * log_det - 0.5 * quad + log_prior

    def predict_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        d1 = self._delta(pts, self.mean1, self.precision1, self.log_det1, self.log_prior1)
        d2 = self._delta(pts, self.mean2, self.precision2, self.log_det2, self.log_prior2)
        return np.where(d1 >= d2, int(ClassId.OMEGA1), int(ClassId.OMEGA2))

    def predict(self, x: np.ndarray) -> ClassId:
        return ClassId(int(self.predict_many(np.asarray(x).reshape(1, -1))[0]))


@dataclass(frozen=True)
class NcdaModel:
    """Nested-cavity rule inside the outer shell, linear discriminant outside."""

    ncc: NccModel
    lda: LdaModel

    name = "NCDA"

    @property
    def dim(self) -> int:
        return self.ncc.dim

    def predict_many(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.dim)
        outer = self.ncc.stack.surfaces[0]
        in_outer = contains_many(outer, pts)
        preds = self.lda.predict_many(pts)
        if in_outer.any():
            preds[in_outer] = self.ncc.predict_many(pts[in_outer])
        return preds

    def predict(self, x: np.ndarray) -> ClassId:
        return ClassId(int(self.predict_many(np.asarray(x).reshape(1, -1))[0]))


Model = NccModel | LdaModel | QdaModel | NcdaModel


def fit_ncc(
    d: Dataset,
    mode: SurfaceMode = SurfaceMode.ADJACENT_PAIR_HULL,
    outer_owner: ClassId = ClassId.OMEGA1,
    max_depth: int = 8,
) -> NccModel:
    """Build the nested cavity stack for the dataset; the rule starts unflipped."""
    return NccModel(build_cavities(d, mode, outer_owner, max_depth))


def fit_lda(d: Dataset, ladder: RegularizationLadder = DEFAULT_LADDER) -> LdaModel:
    """Fit a linear discriminant with a pooled, ladder-regularized covariance."""
    n1, n2 = d.counts
    if n1 == 0 or n2 == 0:
        raise ValueError("LDA requires at least one observation per class")
    if n1 + n2 < 3:
        raise ValueError("LDA requires at least 3 observations in total")
    x1 = d.class_features(ClassId.OMEGA1)
    x2 = d.class_features(ClassId.OMEGA2)
    pooled = (_scatter(x1) + _scatter(x2)) / (n1 + n2 - 2)
    precision, _, _ = _regularize_spd(pooled, ladder)
    return LdaModel(
        mean1=x1.mean(axis=0),
        mean2=x2.mean(axis=0),
        pooled_precision=precision,
        log_prior_ratio=float(np.log(n1 / n2)),
    )


def fit_qda(d: Dataset, ladder: RegularizationLadder = DEFAULT_LADDER) -> QdaModel:
    """Fit a quadratic discriminant with per-class ladder-regularized covariances."""
    n1, n2 = d.counts
    if n1 < 2 or n2 < 2:
        raise ValueError("QDA requires at least two observations per class")
    x1 = d.class_features(ClassId.OMEGA1)
    x2 = d.class_features(ClassId.OMEGA2)
    n = n1 + n2
    prec1, logdet1, _ = _regularize_spd(_scatter(x1) / (n1 - 1), ladder)
    prec2, logdet2, _ = _regularize_spd(_scatter(x2) / (n2 - 1), ladder)
    return QdaModel(
        mean1=x1.mean(axis=0),
        mean2=x2.mean(axis=0),
        precision1=prec1,
        precision2=prec2,
        log_det1=logdet1,
        log_det2=logdet2,
        log_prior1=float(np.log(n1 / n)),
        log_prior2=float(np.log(n2 / n)),
    )


def fit_ncda(
    d: Dataset,
    mode: SurfaceMode = SurfaceMode.ADJACENT_PAIR_HULL,
    outer_owner: ClassId = ClassId.OMEGA1,
    max_depth: int = 8,
    ladder: RegularizationLadder = DEFAULT_LADDER,
) -> NcdaModel:
    """Fit the cavity stack and the linear fallback on the same training data."""
    return NcdaModel(ncc=fit_ncc(d, mode, outer_owner, max_depth), lda=fit_lda(d, ladder))


def _stratified_folds(d: Dataset, folds: int) -> list[np.ndarray]:
    """Round-robin fold assignment within each class, in dataset order."""
    assignment = np.empty(len(d), dtype=np.int64)
    for label in (ClassId.OMEGA1, ClassId.OMEGA2):
        idx = np.flatnonzero(d.labels == int(label))
        assignment[idx] = np.arange(idx.size) % folds
    return [np.flatnonzero(assignment == f) for f in range(folds)]


def calibrate_sign(
    d: Dataset,
    folds: int = 5,
    mode: SurfaceMode = SurfaceMode.ADJACENT_PAIR_HULL,
    outer_owner: ClassId = ClassId.OMEGA1,
    max_depth: int = 8,
) -> bool:
    """Decide whether the cavity rule should be inverted.

    Runs stratified k-fold cross validation of the unflipped rule and returns
    True exactly when the pooled held-out error exceeds 0.5.
    """
    if folds < 2:
        raise ValueError("calibration needs at least 2 folds")
    n1, n2 = d.counts
    if n1 < folds or n2 < folds:
        raise ValueError(
            f"each class needs at least {folds} observations for {folds}-fold CV"
        )
    wrong = 0
    for held in _stratified_folds(d, folds):
        keep = np.setdiff1d(np.arange(len(d)), held)
        train = Dataset(d.features[keep], d.labels[keep])
        model = fit_ncc(train, mode, outer_owner, max_depth)
        preds = model.predict_many(d.features[held])
        wrong += int(np.sum(preds != d.labels[held]))
    return wrong / len(d) > 0.5


# --- persistence ---------------------------------------------------------

def _hull_to_json(h: Hull2D) -> list[list[float]]:
    return [[float(x), float(y)] for x, y in h.vertices]


def _surface_to_json(s: Surface) -> dict:
    doc: dict = {
        "mode": s.mode.value,
        "owner": int(s.owner),
        "depth": s.depth,
        "dim": s.dim,
    }
    if s.mode is SurfaceMode.BOX:
        doc["intervals"] = [[float(lo), float(hi)] for lo, hi in s.intervals]
    else:
        doc["panels"] = [
            {"axes": list(panel.axes), "vertices": _hull_to_json(panel.hull)}
            for panel in s.panels
        ]
    return doc


def _surface_from_json(doc: dict) -> Surface:
    mode = SurfaceMode(doc["mode"])
    owner = ClassId(doc["owner"])
    depth = int(doc["depth"])
    dim = int(doc["dim"])
    if mode is SurfaceMode.BOX:
        intervals = np.array(doc["intervals"], dtype=float).reshape(dim, 2)
        return Surface(mode, owner, depth, dim, intervals=intervals)
    panels = tuple(
        PairPanel(
            (int(p["axes"][0]), int(p["axes"][1])),
            Hull2D(np.array(p["vertices"], dtype=float).reshape(-1, 2)),
        )
        for p in doc["panels"]
    )
    return Surface(mode, owner, depth, dim, panels=panels)


def _ncc_to_json(m: NccModel) -> dict:
    return {
        "flipped": m.flipped,
        "max_depth": m.stack.max_depth,
        "outer_owner": int(m.stack.outer_owner),
        "surfaces": [_surface_to_json(s) for s in m.stack.surfaces],
    }


def _ncc_from_json(doc: dict) -> NccModel:
    stack = CavityStack(
        surfaces=tuple(_surface_from_json(s) for s in doc["surfaces"]),
        max_depth=int(doc["max_depth"]),
        outer_owner=ClassId(doc["outer_owner"]),
    )
    return NccModel(stack=stack, flipped=bool(doc["flipped"]))


def _lda_to_json(m: LdaModel) -> dict:
    return {
        "mean1": m.mean1.tolist(),
        "mean2": m.mean2.tolist(),
        "pooled_precision": m.pooled_precision.tolist(),
        "log_prior_ratio": m.log_prior_ratio,
    }


def _lda_from_json(doc: dict) -> LdaModel:
    mean1 = np.array(doc["mean1"], dtype=float)
    return LdaModel(
        mean1=mean1,
        mean2=np.array(doc["mean2"], dtype=float),
        pooled_precision=np.array(doc["pooled_precision"], dtype=float).reshape(
            mean1.size, mean1.size
        ),
        log_prior_ratio=float(doc["log_prior_ratio"]),
    )


def _qda_to_json(m: QdaModel) -> dict:
    return {
        "mean1": m.mean1.tolist(),
        "mean2": m.mean2.tolist(),
        "precision1": m.precision1.tolist(),
        "precision2": m.precision2.tolist(),
        "log_det1": m.log_det1,
        "log_det2": m.log_det2,
        "log_prior1": m.log_prior1,
        "log_prior2": m.log_prior2,
    }


def _qda_from_json(doc: dict) -> QdaModel:
    mean1 = np.array(doc["mean1"], dtype=float)
    p = mean1.size
    return QdaModel(
        mean1=mean1,
        mean2=np.array(doc["mean2"], dtype=float),
        precision1=np.array(doc["precision1"], dtype=float).reshape(p, p),
        precision2=np.array(doc["precision2"], dtype=float).reshape(p, p),
        log_det1=float(doc["log_det1"]),
        log_det2=float(doc["log_det2"]),
        log_prior1=float(doc["log_prior1"]),
        log_prior2=float(doc["log_prior2"]),
    )


_KINDS = {
    NccModel: ("ncc", _ncc_to_json),
    LdaModel: ("lda", _lda_to_json),
    QdaModel: ("qda", _qda_to_json),
    NcdaModel: ("ncda", None),
}


def save_model(model: Model, path: str | Path) -> None:
    """Persist a fitted model as versioned JSON."""
    kind, encode = _KINDS[type(model)]
    if kind == "ncda":
        body = {"ncc": _ncc_to_json(model.ncc), "lda": _lda_to_json(model.lda)}
    else:
        body = encode(model)
    doc = {"format_version": MODEL_FORMAT_VERSION, "kind": kind, "model": body}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> Model:
    """Load a model saved by save_model; predictions round-trip exactly."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise ModelFormatError(f"{path}: expected a JSON object")
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: format_version {version!r} not supported "
            f"(expected {MODEL_FORMAT_VERSION})"
        )
    kind = doc.get("kind")
    body = doc.get("model")
    try:
        if kind == "ncc":
            return _ncc_from_json(body)
        if kind == "lda":
            return _lda_from_json(body)
        if kind == "qda":
            return _qda_from_json(body)
        if kind == "ncda":
            return NcdaModel(
                ncc=_ncc_from_json(body["ncc"]), lda=_lda_from_json(body["lda"])
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFormatError(f"{path}: malformed {kind} model ({exc})") from None
    raise ModelFormatError(f"{path}: unknown model kind {kind!r}")


def with_flip(model: NccModel, flipped: bool) -> NccModel:
    """Copy of the model with the given flip flag."""
    return replace(model, flipped=flipped)
