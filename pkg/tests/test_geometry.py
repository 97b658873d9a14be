import numpy as np
import pytest

from ncda.data import ClassId, Dataset
from ncda.geometry import (
    SurfaceMode,
    build_cavities,
    contains,
    contains_many,
    containment_flags,
    convex_hull_2d,
    hull_contains,
    region_membership,
    region_membership_many,
    to_polyline,
    wrap,
)

MODES = (SurfaceMode.BOX, SurfaceMode.ADJACENT_PAIR_HULL, SurfaceMode.ALL_PAIR_HULL)


def geometry_example() -> Dataset:
    feats = np.array(
        [[0, 0], [4, 0], [0, 4], [4, 4], [1, 1], [3, 3], [9, 9]], dtype=float
    )
    labs = np.array([1, 1, 1, 1, 2, 2, 2])
    return Dataset(feats, labs)


def random_dataset(rng, p=None, n_per_class=None) -> Dataset:
    p = p if p is not None else int(rng.integers(2, 5))
    n1 = n_per_class if n_per_class is not None else int(rng.integers(3, 12))
    n2 = n_per_class if n_per_class is not None else int(rng.integers(3, 12))
    feats = np.vstack(
        [rng.normal(size=(n1, p)), rng.normal(size=(n2, p)) + rng.normal()]
    )
    labs = np.concatenate([np.ones(n1, int), np.full(n2, 2)])
    return Dataset(feats, labs)


class TestPolyline:
    def test_six_coordinates(self):
        c = np.array([3.0, -1.0, 4.0, 1.0, -5.0, 9.0])
        poly = to_polyline(c)
        assert np.array_equal(poly.vertices[:, 0], np.arange(6))
        assert np.array_equal(poly.vertices[:, 1], c)

    def test_single_coordinate(self):
        poly = to_polyline([7.0])
        assert poly.vertices.shape == (1, 2)
        assert poly.vertices[0, 0] == 0
        assert poly.vertices[0, 1] == 7.0

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            c = rng.normal(size=rng.integers(1, 10))
            assert np.array_equal(to_polyline(c).values, c)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            to_polyline([1.0, np.inf])


class TestConvexHull:
    def test_interior_point_dropped(self):
        h = convex_hull_2d([(0, 0), (1, 0), (0, 1), (0.2, 0.2)])
        assert h.vertices.shape == (3, 2)
        assert {tuple(v) for v in h.vertices} == {(0, 0), (1, 0), (0, 1)}

    def test_single_point(self):
        h = convex_hull_2d([(0.0, 0.0)])
        assert h.vertices.shape == (1, 2)

    def test_collinear_becomes_segment(self):
        h = convex_hull_2d([(0, 0), (1, 1), (2, 2)])
        assert {tuple(v) for v in h.vertices} == {(0, 0), (2, 2)}

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            convex_hull_2d(np.zeros((0, 2)))

    def test_ccw_orientation(self):
        h = convex_hull_2d([(0, 0), (2, 0), (2, 2), (0, 2)])
        v = h.vertices
        area2 = 0.0
        for i in range(len(v)):
            x0, y0 = v[i]
            x1, y1 = v[(i + 1) % len(v)]
            area2 += x0 * y1 - x1 * y0
        assert area2 > 0  # counter-clockwise

    def test_idempotent(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            pts = rng.normal(size=(int(rng.integers(1, 40)), 2))
            h = convex_hull_2d(pts)
            again = convex_hull_2d(h.vertices)
            assert np.array_equal(h.vertices, again.vertices)

    def test_all_inputs_contained(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            pts = rng.normal(size=(int(rng.integers(1, 60)), 2))
            h = convex_hull_2d(pts)
            assert hull_contains(h, pts).all()

    def test_duplicates_deduplicated(self):
        h = convex_hull_2d([(0, 0), (0, 0), (1, 0), (1, 0), (0, 1)])
        assert h.vertices.shape == (3, 2)


class TestWrap:
    def test_box_axis_extremes(self):
        pts = np.array([[0, 0], [4, 0], [0, 4], [4, 4]], float)
        s = wrap(pts, SurfaceMode.BOX, ClassId.OMEGA1, 1)
        assert np.array_equal(s.intervals, [[0, 4], [0, 4]])

    def test_adjacent_pair_single_panel(self):
        pts = np.array([[0, 0], [4, 0], [0, 4], [4, 4]], float)
        s = wrap(pts, SurfaceMode.ADJACENT_PAIR_HULL, ClassId.OMEGA1, 1)
        assert len(s.panels) == 1
        assert s.panels[0].hull.vertices.shape == (4, 2)

    def test_degenerate_single_point_box(self):
        s = wrap(np.array([[1.0, 1.0]]), SurfaceMode.BOX, ClassId.OMEGA1, 1)
        assert np.array_equal(s.intervals, [[1, 1], [1, 1]])
        assert contains(s, [1.0, 1.0])
        assert not contains(s, [1.0, 1.000001])

    def test_panel_counts(self):
        rng = np.random.default_rng(3)
        for p in (2, 3, 5):
            pts = rng.normal(size=(10, p))
            adj = wrap(pts, SurfaceMode.ADJACENT_PAIR_HULL, ClassId.OMEGA1, 1)
            allp = wrap(pts, SurfaceMode.ALL_PAIR_HULL, ClassId.OMEGA1, 1)
            assert len(adj.panels) == p - 1
            assert len(allp.panels) == p * (p - 1) // 2

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            wrap(np.zeros((0, 2)), SurfaceMode.BOX, ClassId.OMEGA1, 1)

    def test_pair_mode_needs_two_dims(self):
        with pytest.raises(ValueError):
            wrap(np.zeros((3, 1)), SurfaceMode.ADJACENT_PAIR_HULL, ClassId.OMEGA1, 1)

    def test_wrapping_completeness(self):
        rng = np.random.default_rng(4)
        for _ in range(60):
            p = int(rng.integers(2, 6))
            pts = rng.normal(size=(int(rng.integers(1, 30)), p))
            for mode in MODES:
                s = wrap(pts, mode, ClassId.OMEGA1, 1)
                assert contains_many(s, pts).all(), mode

    def test_box_monotone_under_new_points(self):
        rng = np.random.default_rng(5)
        pts = rng.normal(size=(10, 3))
        s = wrap(pts, SurfaceMode.BOX, ClassId.OMEGA1, 1)
        grown = wrap(
            np.vstack([pts, rng.normal(size=(5, 3)) * 2]),
            SurfaceMode.BOX,
            ClassId.OMEGA1,
            1,
        )
        assert (grown.intervals[:, 0] <= s.intervals[:, 0]).all()
        assert (grown.intervals[:, 1] >= s.intervals[:, 1]).all()


class TestContains:
    def box(self):
        return wrap(
            np.array([[0, 0], [4, 4]], float), SurfaceMode.BOX, ClassId.OMEGA1, 1
        )

    def test_interior(self):
        assert contains(self.box(), [2, 2])

    def test_boundary_closed(self):
        assert contains(self.box(), [4, 4])
        assert contains(self.box(), [0, 0])
        assert contains(self.box(), [0, 4])

    def test_outside_one_panel(self):
        assert not contains(self.box(), [5, 0])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            contains(self.box(), [1, 2, 3])

    def test_hull_boundary_closed(self):
        pts = np.array([[0, 0], [2, 0], [2, 2], [0, 2]], float)
        s = wrap(pts, SurfaceMode.ADJACENT_PAIR_HULL, ClassId.OMEGA1, 1)
        assert contains(s, [1.0, 0.0])  # on an edge
        assert contains(s, [2.0, 2.0])  # on a vertex
        assert not contains(s, [2.0001, 2.0])


class TestBuildCavities:
    def test_hand_enumerated_nesting(self):
        stack = build_cavities(geometry_example(), SurfaceMode.BOX, ClassId.OMEGA1, 4)
        assert len(stack) == 2
        s1, s2 = stack.surfaces
        assert np.array_equal(s1.intervals, [[0, 4], [0, 4]])
        assert np.array_equal(s2.intervals, [[1, 3], [1, 3]])
        assert s1.owner is ClassId.OMEGA1
        assert s2.owner is ClassId.OMEGA2

    def test_depth_cap(self):
        stack = build_cavities(geometry_example(), SurfaceMode.BOX, ClassId.OMEGA1, 1)
        assert len(stack) == 1

    def test_disjoint_classes_stop_at_one(self):
        feats = np.array([[0, 0], [1, 1], [10, 10], [11, 11]], float)
        d = Dataset(feats, np.array([1, 1, 2, 2]))
        stack = build_cavities(d, SurfaceMode.BOX, ClassId.OMEGA1, 5)
        assert len(stack) == 1

    def test_empty_outer_class_raises(self):
        d = Dataset(np.array([[0.0, 0.0]]), np.array([2]))
        with pytest.raises(ValueError, match="outer owner"):
            build_cavities(d, SurfaceMode.BOX, ClassId.OMEGA1, 3)

    def test_owners_alternate(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            d = random_dataset(rng)
            stack = build_cavities(d, SurfaceMode.BOX, ClassId.OMEGA2, 6)
            for k, s in enumerate(stack.surfaces):
                expect = ClassId.OMEGA2 if k % 2 == 0 else ClassId.OMEGA1
                assert s.owner is expect
                assert s.depth == k + 1

    def test_nesting(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            d = random_dataset(rng)
            mode = MODES[int(rng.integers(len(MODES)))]
            stack = build_cavities(d, mode, ClassId.OMEGA1, 8)
            queries = rng.normal(size=(200, d.dim)) * 2
            flags = containment_flags(stack, queries)
            for k in range(len(stack) - 1):
                assert not (flags[k + 1] & ~flags[k]).any()


class TestRegionMembership:
    def test_examples(self):
        stack = build_cavities(geometry_example(), SurfaceMode.BOX, ClassId.OMEGA1, 4)
        assert region_membership(stack, [0.5, 0.5])  # in S1 only
        assert not region_membership(stack, [2, 2])  # down in S2
        assert not region_membership(stack, [9, 9])  # outside S1

    def test_matches_deepest_shell_parity(self):
        rng = np.random.default_rng(8)
        for _ in range(60):
            d = random_dataset(rng)
            mode = MODES[int(rng.integers(len(MODES)))]
            stack = build_cavities(d, mode, ClassId.OMEGA1, 8)
            queries = rng.normal(size=(100, d.dim)) * 2
            flags = containment_flags(stack, queries)
            got = region_membership_many(stack, queries)
            # Brute force: find the deepest shell containing each point and
            # take its parity.
            for j in range(queries.shape[0]):
                deepest = 0
                for k in range(len(stack)):
                    if flags[k, j]:
                        deepest = k + 1
                assert got[j] == (deepest % 2 == 1)

    def test_dimension_mismatch(self):
        stack = build_cavities(geometry_example(), SurfaceMode.BOX, ClassId.OMEGA1, 4)
        with pytest.raises(ValueError):
            region_membership(stack, [1.0, 2.0, 3.0])
