"""Command-line interface.

Subcommands: simulate, fit, predict, render-parcoords, render-regions,
render-curves.  Exit status 0 on success, 1 on usage errors (bad flags,
schema violations, guard failures), 2 on runtime errors (missing or
malformed files).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .classifiers import (
    LdaModel,
    ModelFormatError,
    NcdaModel,
    NccModel,
    QdaModel,
    calibrate_sign,
    fit_lda,
    fit_ncc,
    fit_ncda,
    fit_qda,
    load_model,
    save_model,
    with_flip,
)
from .config import ConfigError, load_run_config
from .data import ClassId, DatasetError, load_dataset
from .geometry import SurfaceMode
from .report import (
    emit_csv,
    parse_results_csv,
    render_curves,
    render_parcoords,
    render_regions_2d,
    surface_axis_intervals,
)
from .simulation import run_experiment


class UsageError(Exception):
    """Invalid invocation; maps to exit status 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit(2) here
        raise UsageError(message)


def _add_mode_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--mode",
        choices=[m.value for m in SurfaceMode],
        default=SurfaceMode.ADJACENT_PAIR_HULL.value,
        help="surface approximation mode (default: adjacent_pair_hull)",
    )
    sub.add_argument("--max-depth", type=int, default=8)
    sub.add_argument(
        "--outer-owner", type=int, choices=[1, 2], default=1,
        help="class wrapped by the outermost surface",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ncda", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="run a Monte-Carlo experiment")
    sim.add_argument("--config", required=True, help="run-config JSON file")
    sim.add_argument("--out", help="summary CSV path (overrides config output.csv)")
    sim.add_argument("--curves", help="error-curve SVG path (overrides config)")
    sim.add_argument("--workers", type=int, default=1)
    sim.set_defaults(func=_cmd_simulate)

    fit = subs.add_parser("fit", help="fit a classifier on a CSV dataset")
    fit.add_argument("--data", required=True)
    fit.add_argument("--algo", required=True, choices=["ncc", "lda", "qda", "ncda"])
    fit.add_argument("--out", required=True, help="model JSON path")
    fit.add_argument(
        "--calibrate-sign", action="store_true",
        help="flip the cavity rule when its cross-validated error exceeds 0.5",
    )
    fit.add_argument("--folds", type=int, default=5)
    _add_mode_args(fit)
    fit.set_defaults(func=_cmd_fit)

    pred = subs.add_parser("predict", help="apply a saved model to a CSV dataset")
    pred.add_argument("--model", required=True)
    pred.add_argument("--data", required=True)
    pred.add_argument("--out", required=True, help="predictions CSV path")
    pred.set_defaults(func=_cmd_predict)

    parc = subs.add_parser(
        "render-parcoords", help="draw a dataset (and optional surfaces) in parallel coordinates"
    )
    parc.add_argument("--data", required=True)
    parc.add_argument("--model", help="ncc or ncda model whose surfaces to overlay")
    parc.add_argument("--out", required=True, help="SVG path")
    parc.set_defaults(func=_cmd_render_parcoords)

    reg = subs.add_parser(
        "render-regions", help="shade 2-D decision regions of a cavity model"
    )
    reg.add_argument("--model", required=True)
    reg.add_argument("--out", required=True, help="SVG path")
    reg.add_argument("--data", help="training CSV to overplot")
    reg.add_argument(
        "--bounds", help="plot window as xmin,xmax,ymin,ymax (default: padded surfaces)"
    )
    reg.add_argument("--resolution", type=int, default=200)
    reg.set_defaults(func=_cmd_render_regions)

    cur = subs.add_parser("render-curves", help="plot error curves from a results CSV")
    cur.add_argument("--results", required=True)
    cur.add_argument("--out", required=True, help="SVG path")
    cur.set_defaults(func=_cmd_render_curves)

    return parser


def _cmd_simulate(args: argparse.Namespace) -> int:
    try:
        config, outputs = load_run_config(args.config)
    except FileNotFoundError:
        raise
    except ConfigError as exc:
        raise UsageError(str(exc)) from None
    csv_path = Path(args.out) if args.out else outputs.csv
    if csv_path is None:
        raise UsageError("no CSV output path: pass --out or set output.csv in the config")
    curves_path = Path(args.curves) if args.curves else outputs.curves
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    rows = run_experiment(config, workers=args.workers)
    emit_csv(rows, csv_path)
    print(f"wrote {len(rows)} summary rows to {csv_path}")
    if curves_path is not None:
        render_curves(rows, curves_path)
        print(f"wrote error curves to {curves_path}")
    return 0


def _fit_kwargs(args: argparse.Namespace) -> dict:
    if args.max_depth < 1:
        raise UsageError("--max-depth must be at least 1")
    return {
        "mode": SurfaceMode(args.mode),
        "outer_owner": ClassId(args.outer_owner),
        "max_depth": args.max_depth,
    }


def _cmd_fit(args: argparse.Namespace) -> int:
    if args.calibrate_sign and args.algo != "ncc":
        raise UsageError("--calibrate-sign only applies to --algo ncc")
    data = load_dataset(args.data)
    if args.algo == "lda":
        model = fit_lda(data)
    elif args.algo == "qda":
        model = fit_qda(data)
    elif args.algo == "ncda":
        model = fit_ncda(data, **_fit_kwargs(args))
    else:
        kwargs = _fit_kwargs(args)
        model = fit_ncc(data, **kwargs)
        if args.calibrate_sign:
            flipped = calibrate_sign(data, folds=args.folds, **kwargs)
            model = with_flip(model, flipped)
            print(f"sign calibration: flipped={flipped}")
    save_model(model, args.out)
    print(f"fitted {args.algo} on {len(data)} observations -> {args.out}")
    return 0


def _cmd_predict(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    data = load_dataset(args.data)
    if data.dim != model.dim:
        raise UsageError(
            f"data dimension {data.dim} does not match model dimension {model.dim}"
        )
    preds = model.predict_many(data.features)
    out = Path(args.out)
    with out.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("label\n")
        for label in preds:
            fh.write(f"{int(label)}\n")
    print(f"wrote {preds.size} predictions to {out}")
    return 0


def _model_stack(model) -> object:
    if isinstance(model, NccModel):
        return model.stack
    if isinstance(model, NcdaModel):
        return model.ncc.stack
    raise UsageError("model has no cavity surfaces to draw (need ncc or ncda)")


def _cmd_render_parcoords(args: argparse.Namespace) -> int:
    data = load_dataset(args.data)
    stack = _model_stack(load_model(args.model)) if args.model else None
    if data.dim < 2:
        raise UsageError("parallel coordinates need at least 2 features")
    render_parcoords(data, stack, args.out)
    print(f"wrote parallel-coordinates figure to {args.out}")
    return 0


def _parse_bounds(text: str) -> tuple[float, float, float, float]:
    parts = text.split(",")
    if len(parts) != 4:
        raise UsageError("--bounds must be xmin,xmax,ymin,ymax")
    try:
        xmin, xmax, ymin, ymax = (float(v) for v in parts)
    except ValueError:
        raise UsageError("--bounds values must be numbers") from None
    if not (xmin < xmax and ymin < ymax):
        raise UsageError("--bounds must satisfy xmin < xmax and ymin < ymax")
    return xmin, xmax, ymin, ymax


def _default_bounds(stack, data) -> tuple[float, float, float, float]:
    intervals = surface_axis_intervals(stack.surfaces[0])
    lo = intervals[:, 0].copy()
    hi = intervals[:, 1].copy()
    if data is not None and len(data):
        lo = np.minimum(lo, data.features.min(axis=0))
        hi = np.maximum(hi, data.features.max(axis=0))
    pad = 0.25 * (hi - lo) + 0.5
    return (lo[0] - pad[0], hi[0] + pad[0], lo[1] - pad[1], hi[1] + pad[1])


def _cmd_render_regions(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    if not isinstance(model, (NccModel, NcdaModel)):
        raise UsageError("render-regions needs an ncc or ncda model")
    if model.dim != 2:
        raise UsageError("REGION2D requires p=2")
    if args.resolution < 1:
        raise UsageError("--resolution must be at least 1")
    data = load_dataset(args.data) if args.data else None
    if data is not None and data.dim != 2:
        raise UsageError("overplotted data must be 2-dimensional")
    stack = model.stack if isinstance(model, NccModel) else model.ncc.stack
    bounds = _parse_bounds(args.bounds) if args.bounds else _default_bounds(stack, data)
    render_regions_2d(model, bounds, args.resolution, args.out, dataset=data)
    print(f"wrote decision-region figure to {args.out}")
    return 0


def _cmd_render_curves(args: argparse.Namespace) -> int:
    rows = parse_results_csv(args.results)
    if not rows:
        raise UsageError(f"{args.results}: no rows to plot")
    if len({r.experiment for r in rows}) != 1:
        raise UsageError("results mix experiments; plot one experiment at a time")
    render_curves(rows, args.out)
    print(f"wrote error curves to {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, DatasetError, ModelFormatError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
