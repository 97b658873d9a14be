"""Parallel-coordinates mapping, 2-D hulls, and nested cavity surfaces.

A p-dimensional point maps to a polygonal line whose vertex for coordinate i
sits at (i, value) over p parallel vertical axes.  Decision surfaces are
approximated panel-wise: either as a product of per-axis intervals (BOX) or
as 2-D convex hulls of pairwise coordinate projections.  Wrapping one class,
then the opposite-class points it encloses, and so on, yields a stack of
nested surfaces with alternating owners; the outer owner's decision region
is the union of the odd-depth shells.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .data import ClassId, Dataset, split_by_class

# Relative slack for point-in-hull tests: keeps training points that sit
# exactly on a hull edge on the inside despite floating-point rounding.
EDGE_TOLERANCE = 1e-12


class SurfaceMode(Enum):
    BOX = "box"
    ADJACENT_PAIR_HULL = "adjacent_pair_hull"
    ALL_PAIR_HULL = "all_pair_hull"


@dataclass(frozen=True)
class Polyline:
    """Image of one point in the parallel-axes plane: vertex i is (i, value_i)."""

    vertices: np.ndarray  # (p, 2); column 0 holds the axis indices 0..p-1

    @property
    def values(self) -> np.ndarray:
        """The original coordinate vector (the y-values)."""
        return self.vertices[:, 1]


def to_polyline(point: np.ndarray) -> Polyline:
    """Map a length-p vector to its polygonal line over the parallel axes."""
    point = np.asarray(point, dtype=float).ravel()
    if point.size < 1:
        raise ValueError("point must have at least one coordinate")
    if not np.isfinite(point).all():
        raise ValueError("point contains non-finite values")
    verts = np.column_stack([np.arange(point.size, dtype=float), point])
    return Polyline(verts)


@dataclass(frozen=True)
class Hull2D:
    """Convex polygon in counter-clockwise vertex order.

    Degenerate hulls (a single vertex, or a two-vertex segment from collinear
    input) are legal; their interior is the point or segment itself.
    """

    vertices: np.ndarray  # (k, 2)


def _drop_octagon_interior(pts: np.ndarray) -> np.ndarray:
    """Exact hull prefilter: discard points strictly inside the polygon of
    the eight axis/diagonal extreme points; those can never be hull vertices."""
    x = pts[:, 0]
    y = pts[:, 1]
    # Extremes in counter-clockwise direction order.
    corners = pts[
        [
            int(np.argmax(x)),
            int(np.argmax(x + y)),
            int(np.argmax(y)),
            int(np.argmax(y - x)),
            int(np.argmin(x)),
            int(np.argmin(x + y)),
            int(np.argmin(y)),
            int(np.argmax(x - y)),
        ]
    ]
    strict = np.ones(pts.shape[0], dtype=bool)
    for i in range(8):
        v0 = corners[i]
        e = corners[(i + 1) % 8] - v0
        if e[0] == 0.0 and e[1] == 0.0:
            continue
        cross = e[0] * (y - v0[1]) - e[1] * (x - v0[0])
        # Strictly inside only when comfortably past the edge.
        strict &= cross > EDGE_TOLERANCE * (np.abs(e[0] * y) + np.abs(e[1] * x) + 1.0)
    return pts[~strict] if strict.any() else pts


def convex_hull_2d(points: np.ndarray) -> Hull2D:
    """Minimal convex polygon containing the input points (monotone chain).

    Collinear points are dropped, so the retained boundary is strictly
    convex.  Duplicates are removed before the scan.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] == 0:
        raise ValueError("convex hull of an empty point set")
    if pts.shape[0] > 16:
        pts = _drop_octagon_interior(pts)
    pts = np.unique(pts, axis=0)  # also sorts lexicographically
    if pts.shape[0] == 1:
        return Hull2D(pts)

    def half(chain_pts):
        out: list[tuple[float, float]] = []
        for qx, qy in chain_pts:
            while len(out) > 1:
                ax, ay = out[-2]
                bx, by = out[-1]
                if (bx - ax) * (qy - ay) - (by - ay) * (qx - ax) <= 0.0:
                    out.pop()
                else:
                    break
            out.append((qx, qy))
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    hull = lower[:-1] + upper[:-1]
    return Hull2D(np.array(hull))


def hull_contains(hull: Hull2D, points: np.ndarray) -> np.ndarray:
    """Closed membership test for many 2-D points at once.

    Boundary points count as inside; each edge test allows a relative slack
    of EDGE_TOLERANCE times the magnitude of the cross-product terms.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    verts = hull.vertices
    k = verts.shape[0]
    if k == 1:
        scale = 1.0 + np.abs(verts[0]).max()
        return np.abs(pts - verts[0]).max(axis=1) <= EDGE_TOLERANCE * scale
    if k == 2:
        return _segment_contains(verts[0], verts[1], pts)
    edges = np.roll(verts, -1, axis=0) - verts  # (k, 2)
    wx = pts[:, 0][None, :] - verts[:, 0][:, None]  # (k, N)
    wy = pts[:, 1][None, :] - verts[:, 1][:, None]
    t1 = edges[:, 0][:, None] * wy
    t2 = edges[:, 1][:, None] * wx
    tol = EDGE_TOLERANCE * (np.abs(t1) + np.abs(t2))
    return np.all(t1 - t2 >= -tol, axis=0)


def _segment_contains(a: np.ndarray, b: np.ndarray, pts: np.ndarray) -> np.ndarray:
    e = b - a
    wx = pts[:, 0] - a[0]
    wy = pts[:, 1] - a[1]
    t1 = e[0] * wy
    t2 = e[1] * wx
    cross = t1 - t2
    tol = EDGE_TOLERANCE * (np.abs(t1) + np.abs(t2) + e @ e)
    on_line = np.abs(cross) <= tol
    along = e[0] * wx + e[1] * wy
    len2 = e @ e
    return on_line & (along >= -tol) & (along <= len2 + tol)


@dataclass(frozen=True)
class PairPanel:
    """One 2-D hull constraint on a pair of coordinate axes."""

    axes: tuple[int, int]
    hull: Hull2D


@dataclass(frozen=True)
class Surface:
    """One wrapped shell: the intersection of its panel constraints.

    BOX surfaces carry per-axis [lo, hi] intervals; hull surfaces carry one
    PairPanel per axis pair.  All boundaries are closed.
    """

    mode: SurfaceMode
    owner: ClassId
    depth: int
    dim: int
    intervals: np.ndarray | None = None
    panels: tuple[PairPanel, ...] = ()


def _pair_axes(p: int, mode: SurfaceMode) -> list[tuple[int, int]]:
    if mode is SurfaceMode.ADJACENT_PAIR_HULL:
        return [(i, i + 1) for i in range(p - 1)]
    return [(i, j) for i in range(p) for j in range(i + 1, p)]


def wrap(
    points: np.ndarray, mode: SurfaceMode, owner: ClassId, depth: int
) -> Surface:
    """Approximate convex wrap of a point set, panel by panel.

    Every input point satisfies ``contains`` on the result.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("wrap requires a non-empty (n, p) point matrix")
    p = pts.shape[1]
    if mode is SurfaceMode.BOX:
        intervals = np.column_stack([pts.min(axis=0), pts.max(axis=0)])
        return Surface(mode, owner, depth, p, intervals=intervals)
    if p < 2:
        raise ValueError(f"{mode.value} requires at least 2 dimensions")
    panels = tuple(
        PairPanel((i, j), convex_hull_2d(pts[:, (i, j)]))
        for i, j in _pair_axes(p, mode)
    )
    return Surface(mode, owner, depth, p, panels=panels)


def contains_many(s: Surface, points: np.ndarray) -> np.ndarray:
    """Vectorized closed membership test: True where every panel holds."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.shape[1] != s.dim:
        raise ValueError(f"expected dimension {s.dim}, got {pts.shape[1]}")
    if s.mode is SurfaceMode.BOX:
        lo = s.intervals[:, 0]
        hi = s.intervals[:, 1]
        return np.all((pts >= lo) & (pts <= hi), axis=1)
    active = np.arange(pts.shape[0])
    sub = pts
    for panel in s.panels:
        i, j = panel.axes
        keep = hull_contains(panel.hull, sub[:, (i, j)])
        if not keep.all():
            active = active[keep]
            if active.size == 0:
                break
            sub = sub[keep]
    inside = np.zeros(pts.shape[0], dtype=bool)
    inside[active] = True
    return inside


def contains(s: Surface, x: np.ndarray) -> bool:
    """Closed membership test for a single point."""
    return bool(contains_many(s, np.asarray(x, dtype=float).reshape(1, -1))[0])


@dataclass(frozen=True)
class CavityStack:
    """Nested shells S1..Sm with alternating owners, outermost first."""

    surfaces: tuple[Surface, ...]
    max_depth: int
    outer_owner: ClassId

    def __post_init__(self) -> None:
        if not self.surfaces:
            raise ValueError("a cavity stack needs at least one surface")
        if len(self.surfaces) > self.max_depth:
            raise ValueError("more surfaces than max_depth allows")

    @property
    def dim(self) -> int:
        return self.surfaces[0].dim

    def __len__(self) -> int:
        return len(self.surfaces)


def build_cavities(
    d: Dataset, mode: SurfaceMode, outer_owner: ClassId, max_depth: int
) -> CavityStack:
    """Wrap classes alternately into nested shells.

    S1 wraps the outer owner's points; each deeper shell wraps the
    opposite-class points enclosed by the previous one.  The loop stops when
    nothing is enclosed or max_depth is reached.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    x1, x2 = split_by_class(d)
    by_class = {ClassId.OMEGA1: x1, ClassId.OMEGA2: x2}
    owner = outer_owner
    current = by_class[owner]
    if current.shape[0] == 0:
        raise ValueError(f"outer owner class {int(owner)} has no observations")
    surfaces: list[Surface] = []
    for depth in range(1, max_depth + 1):
        surface = wrap(current, mode, owner, depth)
        surfaces.append(surface)
        owner = owner.other
        candidates = by_class[owner]
        if candidates.shape[0] == 0:
            break
        enclosed = candidates[contains_many(surface, candidates)]
        if enclosed.shape[0] == 0:
            break
        current = enclosed
    return CavityStack(tuple(surfaces), max_depth, outer_owner)


def containment_flags(stack: CavityStack, points: np.ndarray) -> np.ndarray:
    """(m, N) boolean matrix of per-shell membership."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    return np.array([contains_many(s, pts) for s in stack.surfaces])


def region_from_flags(flags: np.ndarray) -> np.ndarray:
    """Union of shell differences (S1 minus S2, S3 minus S4, ..., with the
    last odd shell taken whole) evaluated from an (m, N) flag matrix."""
    m = flags.shape[0]
    member = np.zeros(flags.shape[1], dtype=bool)
    for k in range(0, m, 2):  # shells S1, S3, ... (0-based even indices)
        inner = flags[k + 1] if k + 1 < m else np.zeros_like(member)
        member |= flags[k] & ~inner
    return member


def region_membership_many(stack: CavityStack, points: np.ndarray) -> np.ndarray:
    """True where a point falls in the outer owner's region."""
    return region_from_flags(containment_flags(stack, points))


def region_membership(stack: CavityStack, x: np.ndarray) -> bool:
    """Single-point version of region_membership_many."""
    return bool(
        region_membership_many(stack, np.asarray(x, dtype=float).reshape(1, -1))[0]
    )
