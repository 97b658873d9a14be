"""Strict JSON run-configuration files for the simulate command.

A run config mirrors ExperimentConfig plus optional output paths.  Unknown
keys are rejected so typos fail loudly instead of silently falling back to
defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .geometry import SurfaceMode
from .simulation import ExperimentConfig

CONFIG_SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """A run-config file violates the schema."""


@dataclass(frozen=True)
class RunOutputs:
    csv: Path | None = None
    curves: Path | None = None


_TOP_KEYS = {
    "schema_version",
    "experiment",
    "c",
    "dims",
    "train_sizes",
    "trials",
    "test_per_class",
    "classifiers",
    "surface_mode",
    "max_depth",
    "base_seed",
    "sign_calibration",
    "output",
}
_OUTPUT_KEYS = {"csv", "curves"}


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _as_int(doc: dict, key: str, default: int) -> int:
    value = doc.get(key, default)
    _require(isinstance(value, int) and not isinstance(value, bool),
             f"{key} must be an integer")
    return value


def _as_int_list(doc: dict, key: str, default: tuple[int, ...]) -> tuple[int, ...]:
    value = doc.get(key)
    if value is None:
        return default
    _require(
        isinstance(value, list)
        and value
        and all(isinstance(v, int) and not isinstance(v, bool) for v in value),
        f"{key} must be a non-empty list of integers",
    )
    return tuple(value)


def load_run_config(path: str | Path) -> tuple[ExperimentConfig, RunOutputs]:
    """Parse and validate a run-config file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    _require(isinstance(doc, dict), f"{path}: expected a JSON object")

    unknown = set(doc) - _TOP_KEYS
    _require(not unknown, f"{path}: unknown keys {sorted(unknown)}")
    _require(
        doc.get("schema_version") == CONFIG_SCHEMA_VERSION,
        f"{path}: schema_version must be {CONFIG_SCHEMA_VERSION}",
    )
    _require("experiment" in doc, f"{path}: missing required key 'experiment'")
    experiment = doc["experiment"]
    _require(isinstance(experiment, str), f"{path}: experiment must be a string")

    c = doc.get("c", 1.0)
    _require(
        isinstance(c, (int, float)) and not isinstance(c, bool),
        f"{path}: c must be a number",
    )

    classifiers = doc.get("classifiers")
    if classifiers is None:
        classifiers_t = ("NCC", "NCDA", "LDA", "QDA")
    else:
        _require(
            isinstance(classifiers, list)
            and classifiers
            and all(isinstance(v, str) for v in classifiers),
            f"{path}: classifiers must be a non-empty list of names",
        )
        classifiers_t = tuple(classifiers)

    mode_value = doc.get("surface_mode", SurfaceMode.ADJACENT_PAIR_HULL.value)
    try:
        mode = SurfaceMode(mode_value)
    except ValueError:
        raise ConfigError(
            f"{path}: surface_mode must be one of "
            f"{[m.value for m in SurfaceMode]}, got {mode_value!r}"
        ) from None

    sign_calibration = doc.get("sign_calibration", False)
    _require(
        isinstance(sign_calibration, bool),
        f"{path}: sign_calibration must be a boolean",
    )

    output = doc.get("output", {})
    _require(isinstance(output, dict), f"{path}: output must be an object")
    unknown_out = set(output) - _OUTPUT_KEYS
    _require(not unknown_out, f"{path}: unknown output keys {sorted(unknown_out)}")
    for key in output:
        _require(isinstance(output[key], str), f"{path}: output.{key} must be a path")
    outputs = RunOutputs(
        csv=Path(output["csv"]) if "csv" in output else None,
        curves=Path(output["curves"]) if "curves" in output else None,
    )

    try:
        config = ExperimentConfig(
            experiment_id=experiment,
            c=float(c),
            dims=_as_int_list(doc, "dims", (2, 4, 8, 16)),
            train_sizes=_as_int_list(doc, "train_sizes", (10, 20, 40, 80, 160, 200)),
            trials=_as_int(doc, "trials", 1000),
            test_per_class=_as_int(doc, "test_per_class", 1000),
            classifiers=classifiers_t,
            surface_mode=mode,
            max_depth=_as_int(doc, "max_depth", 8),
            base_seed=_as_int(doc, "base_seed", 1234567890),
            sign_calibration=sign_calibration,
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config, outputs
