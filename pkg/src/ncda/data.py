"""Labeled datasets, CSV I/O, and seeded random-stream derivation."""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Iterator

import numpy as np


class DatasetError(ValueError):
    """Malformed dataset file; the message names the offending data row."""


class ClassId(IntEnum):
    """The two class labels. The order OMEGA1 < OMEGA2 fixes every tie-break."""

    OMEGA1 = 1
    OMEGA2 = 2

    @property
    def other(self) -> "ClassId":
        return ClassId.OMEGA2 if self is ClassId.OMEGA1 else ClassId.OMEGA1


@dataclass(frozen=True)
class Observation:
    """One labeled point: a length-p feature vector and its class."""

    features: np.ndarray
    label: ClassId


@dataclass(frozen=True)
class Dataset:
    """Immutable labeled sample: an (n, p) feature matrix plus 1/2 labels.

    Arrays are copied and frozen at construction so datasets can be shared
    across concurrent workers.
    """

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self) -> None:
        feats = np.asarray(self.features, dtype=float)
        labs = np.asarray(self.labels, dtype=np.int64)
        if feats.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {feats.shape}")
        if feats.shape[1] < 1:
            raise ValueError("feature dimension must be at least 1")
        if labs.shape != (feats.shape[0],):
            raise ValueError(
                f"labels shape {labs.shape} does not match {feats.shape[0]} rows"
            )
        if feats.size and not np.isfinite(feats).all():
            raise ValueError("features contain non-finite values")
        bad = set(np.unique(labs)) - {1, 2}
        if bad:
            raise ValueError(f"labels must be 1 or 2, got {sorted(bad)}")
        feats = feats.copy()
        labs = labs.copy()
        feats.flags.writeable = False
        labs.flags.writeable = False
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labs)

    def __len__(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def count(self, label: ClassId) -> int:
        return int(np.sum(self.labels == int(label)))

    @property
    def counts(self) -> tuple[int, int]:
        return self.count(ClassId.OMEGA1), self.count(ClassId.OMEGA2)

    def class_features(self, label: ClassId) -> np.ndarray:
        """Rows of the given class, in dataset order."""
        return self.features[self.labels == int(label)]

    def observations(self) -> Iterator[Observation]:
        for row, lab in zip(self.features, self.labels):
            yield Observation(row, ClassId(int(lab)))


def split_by_class(d: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Partition the feature rows into (class-1 matrix, class-2 matrix)."""
    return d.class_features(ClassId.OMEGA1), d.class_features(ClassId.OMEGA2)


def _expected_header(p: int) -> list[str]:
    return [f"f{i}" for i in range(1, p + 1)] + ["label"]


def load_dataset(path: str | Path, fmt: str = "csv") -> Dataset:
    """Read a labeled dataset from a CSV file.

    The file must have a header ``f1,...,fp,label`` and label values 1 or 2.
    Errors name the data row (1-based, header excluded) that caused them.
    """
    if fmt != "csv":
        raise ValueError(f"unsupported dataset format: {fmt!r}")
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file, expected a header row") from None
        p = len(header) - 1
        if p < 1 or header != _expected_header(p):
            raise DatasetError(
                f"{path}: header must be f1,...,fp,label, got {','.join(header)}"
            )
        feats: list[list[float]] = []
        labs: list[int] = []
        for rownum, row in enumerate(reader, start=1):
            if len(row) != p + 1:
                raise DatasetError(
                    f"{path}: row {rownum}: expected {p + 1} fields, got {len(row)}"
                )
            values = []
            for name, cell in zip(header, row[:p]):
                try:
                    v = float(cell)
                except ValueError:
                    raise DatasetError(
                        f"{path}: row {rownum}: non-numeric feature {name}={cell!r}"
                    ) from None
                if not np.isfinite(v):
                    raise DatasetError(
                        f"{path}: row {rownum}: non-finite feature {name}={cell!r}"
                    )
                values.append(v)
            if row[p] not in ("1", "2"):
                raise DatasetError(
                    f"{path}: row {rownum}: unknown label {row[p]!r}, expected 1 or 2"
                )
            feats.append(values)
            labs.append(int(row[p]))
    features = np.array(feats, dtype=float).reshape(len(feats), p)
    return Dataset(features, np.array(labs, dtype=np.int64))


def save_dataset(d: Dataset, path: str | Path) -> None:
    """Write a dataset as CSV with 17-significant-digit features (round-trip exact)."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(_expected_header(d.dim)) + "\n")
        for row, lab in zip(d.features, d.labels):
            cells = [format(v, ".17g") for v in row]
            cells.append(str(int(lab)))
            fh.write(",".join(cells) + "\n")


@dataclass(frozen=True)
class SeedSpec:
    """Address of one reproducible random stream.

    Equal specs always yield identical streams; changing any label gives a
    statistically independent one, so trials can run in any order or in
    parallel without perturbing each other.
    """

    base_seed: int
    experiment: str
    p: int
    n: int
    trial: int
    purpose: str

    def __post_init__(self) -> None:
        if not 0 <= self.base_seed < 2**64:
            raise ValueError("base_seed must fit in an unsigned 64-bit integer")
        if self.p < 0 or self.n < 0 or self.trial < 0:
            raise ValueError("stream labels must be non-negative")


def _word(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "little")


def derive_stream(spec: SeedSpec) -> np.random.Generator:
    """Deterministic generator for the given seed spec."""
    entropy = [
        spec.base_seed,
        _word(spec.experiment),
        spec.p,
        spec.n,
        spec.trial,
        _word(spec.purpose),
    ]
    return np.random.default_rng(np.random.SeedSequence(entropy))
