"""Result tables and figures: summary CSV, parallel-coordinates plots,
2-D decision regions, and error curves versus 1/n.

All figures are written as SVG through matplotlib with a pinned hash salt
and no date metadata, so identical inputs give byte-identical files.
Artists carry stable ``gid`` attributes (``obs-*``, ``surface-*``,
``series-*``) that show up as SVG element ids, which keeps the output
machine-checkable.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import ListedColormap
from matplotlib.patches import Polygon

from .classifiers import NcdaModel, NccModel
from .data import ClassId, Dataset
from .geometry import CavityStack, Surface, SurfaceMode, to_polyline
from .simulation import SummaryRow

CSV_HEADER = "experiment,classifier,p,n,mean_err,std_err,trials"

CLASS_COLORS = {ClassId.OMEGA1: "tab:blue", ClassId.OMEGA2: "tab:red"}
SERIES_COLORS = {
    "NCC": "tab:blue",
    "NCDA": "tab:orange",
    "LDA": "tab:green",
    "QDA": "tab:red",
    "NCC_CAL": "tab:purple",
}
REGION_CMAP = ListedColormap(["#c6dbef", "#fcbba1"])  # class 1, class 2

_RC = {
    "svg.hashsalt": "ncda",
    "svg.fonttype": "path",
    "figure.dpi": 100,
    "font.size": 9,
}


def emit_csv(rows: list[SummaryRow], path: str | Path) -> None:
    """Write summary rows with fixed 6-decimal errors, in the given order."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in rows:
            fh.write(
                f"{r.experiment},{r.classifier},{r.p},{r.n},"
                f"{r.mean_err:.6f},{r.std_err:.6f},{r.trials}\n"
            )


def parse_results_csv(path: str | Path) -> list[SummaryRow]:
    """Read back a file produced by emit_csv."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CSV_HEADER.split(","):
            raise ValueError(f"{path}: unexpected results header {header}")
        rows = []
        for rec in reader:
            if len(rec) != 7:
                raise ValueError(f"{path}: expected 7 fields, got {len(rec)}")
            rows.append(
                SummaryRow(
                    experiment=rec[0],
                    classifier=rec[1],
                    p=int(rec[2]),
                    n=int(rec[3]),
                    mean_err=float(rec[4]),
                    std_err=float(rec[5]),
                    trials=int(rec[6]),
                )
            )
    return rows


def _save(fig, path: str | Path) -> None:
    fig.savefig(Path(path), format="svg", metadata={"Date": None})
    plt.close(fig)


def surface_axis_intervals(s: Surface) -> np.ndarray:
    """Per-axis [lo, hi] footprint of a surface (intersection over panels)."""
    if s.mode is SurfaceMode.BOX:
        return np.array(s.intervals, dtype=float)
    lo = np.full(s.dim, -np.inf)
    hi = np.full(s.dim, np.inf)
    for panel in s.panels:
        verts = panel.hull.vertices
        for axis, col in zip(panel.axes, (0, 1)):
            lo[axis] = max(lo[axis], verts[:, col].min())
            hi[axis] = min(hi[axis], verts[:, col].max())
    return np.column_stack([lo, hi])


def _surface_style(depth: int) -> dict:
    # Outermost shell dashed, deeper shells solid.
    return {
        "linestyle": "--" if depth == 1 else "-",
        "linewidth": 1.6,
        "fill": False,
    }


def render_parcoords(
    dataset: Dataset, stack: CavityStack | None, path: str | Path
) -> None:
    """Plot each observation as a polygonal line over the parallel axes,
    with optional nested-surface bands between consecutive axes."""
    p = dataset.dim
    if p < 2:
        raise ValueError("parallel-coordinates plots need at least 2 axes")
    if stack is not None and stack.dim != p:
        raise ValueError("surface stack dimension does not match the data")
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(1.2 * p + 2, 4))
        for axis in range(p):
            ax.axvline(axis, color="0.75", linewidth=0.8, zorder=0)
        if stack is not None:
            for s in stack.surfaces:
                intervals = surface_axis_intervals(s)
                color = CLASS_COLORS[s.owner]
                for a in range(p - 1):
                    lo0, hi0 = intervals[a]
                    lo1, hi1 = intervals[a + 1]
                    quad = Polygon(
                        [(a, lo0), (a + 1, lo1), (a + 1, hi1), (a, hi0)],
                        edgecolor=color,
                        zorder=1,
                        **_surface_style(s.depth),
                    )
                    quad.set_gid(f"surface-{s.depth}-panel-{a}")
                    ax.add_patch(quad)
        for i, obs in enumerate(dataset.observations()):
            poly = to_polyline(obs.features)
            (line,) = ax.plot(
                poly.vertices[:, 0],
                poly.vertices[:, 1],
                color=CLASS_COLORS[obs.label],
                linewidth=0.9,
                alpha=0.85,
                zorder=2,
            )
            line.set_gid(f"obs-{i}")
        ax.set_xticks(range(p))
        ax.set_xticklabels([rf"$\bar{{X}}_{{{i + 1}}}$" for i in range(p)])
        ax.set_xlim(-0.3, p - 0.7)
        ax.set_ylabel("value")
        _save(fig, path)


def render_regions_2d(
    model: NccModel | NcdaModel,
    bounds: tuple[float, float, float, float],
    resolution: int,
    path: str | Path,
    dataset: Dataset | None = None,
) -> np.ndarray:
    """Shade the plane by predicted class over a resolution x resolution grid.

    Returns the integer label grid (row i = y cell i, column j = x cell j,
    origin at the lower-left) that was rendered.
    """
    if model.dim != 2:
        raise ValueError("REGION2D requires p=2")
    if resolution < 1:
        raise ValueError("resolution must be at least 1")
    xmin, xmax, ymin, ymax = bounds
    if not (xmin < xmax and ymin < ymax):
        raise ValueError("bounds must satisfy xmin < xmax and ymin < ymax")
    xs = xmin + (np.arange(resolution) + 0.5) * (xmax - xmin) / resolution
    ys = ymin + (np.arange(resolution) + 0.5) * (ymax - ymin) / resolution
    gx, gy = np.meshgrid(xs, ys)
    grid = (
        model.predict_many(np.column_stack([gx.ravel(), gy.ravel()]))
        .reshape(resolution, resolution)
    )
    stack = model.stack if isinstance(model, NccModel) else model.ncc.stack
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 5))
        image = ax.imshow(
            grid,
            origin="lower",
            extent=(xmin, xmax, ymin, ymax),
            cmap=REGION_CMAP,
            vmin=int(ClassId.OMEGA1),
            vmax=int(ClassId.OMEGA2),
            interpolation="nearest",
            aspect="auto",
        )
        image.set_gid("region-shading")
        for s in stack.surfaces:
            outline = _surface_outline_2d(s)
            patch = Polygon(outline, edgecolor="black", **_surface_style(s.depth))
            patch.set_gid(f"surface-{s.depth}-outline")
            ax.add_patch(patch)
        if dataset is not None:
            for label in (ClassId.OMEGA1, ClassId.OMEGA2):
                pts = dataset.class_features(label)
                if pts.size:
                    sc = ax.scatter(
                        pts[:, 0],
                        pts[:, 1],
                        s=28,
                        color=CLASS_COLORS[label],
                        edgecolor="black",
                        linewidth=0.8,
                        zorder=3,
                    )
                    sc.set_gid(f"train-points-{int(label)}")
        ax.set_xlabel("$x_1$")
        ax.set_ylabel("$x_2$")
        _save(fig, path)
    return grid


def _surface_outline_2d(s: Surface) -> np.ndarray:
    if s.mode is SurfaceMode.BOX:
        (lo0, hi0), (lo1, hi1) = s.intervals
        return np.array([(lo0, lo1), (hi0, lo1), (hi0, hi1), (lo0, hi1)])
    verts = s.panels[0].hull.vertices
    if verts.shape[0] == 1:  # degenerate: draw a tiny marker-sized triangle
        x, y = verts[0]
        eps = 1e-9
        return np.array([(x, y), (x + eps, y), (x, y + eps)])
    return verts


def render_curves(rows: list[SummaryRow], path: str | Path) -> None:
    """Plot mean and standard deviation of the error against 1/n.

    One pair of panels per dimension p, one series per classifier; x values
    shrink as the training size grows.
    """
    if not rows:
        raise ValueError("no rows to plot")
    experiments = {r.experiment for r in rows}
    if len(experiments) != 1:
        raise ValueError(f"rows mix experiments {sorted(experiments)}")
    experiment = rows[0].experiment
    ps = sorted({r.p for r in rows})
    classifiers = list(dict.fromkeys(r.classifier for r in rows))
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(
            len(ps), 2, figsize=(9, 3.2 * len(ps)), squeeze=False
        )
        for row_idx, p in enumerate(ps):
            ax_mean, ax_std = axes[row_idx]
            for name in classifiers:
                series = sorted(
                    (r for r in rows if r.p == p and r.classifier == name),
                    key=lambda r: r.n,
                )
                if not series:
                    continue
                x = [1.0 / r.n for r in series]
                color = SERIES_COLORS.get(name, "tab:gray")
                (line_m,) = ax_mean.plot(
                    x, [r.mean_err for r in series], marker="o", color=color,
                    label=name,
                )
                line_m.set_gid(f"series-{name}-p{p}-mean")
                (line_s,) = ax_std.plot(
                    x, [r.std_err for r in series], marker="o", color=color,
                    label=name,
                )
                line_s.set_gid(f"series-{name}-p{p}-std")
            ax_mean.set_title(f"{experiment}, p = {p}: mean error")
            ax_std.set_title(f"{experiment}, p = {p}: std of error")
            for ax in (ax_mean, ax_std):
                ax.set_xlabel("1 / n")
            ax_mean.set_ylabel("error rate")
        axes[0][0].legend(loc="best", fontsize=8)
        fig.tight_layout()
        _save(fig, path)
