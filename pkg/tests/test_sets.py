"""Projector, distance, inverse-projector and sampler behaviour per set variant."""

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings, strategies as st

from regkit.sets import (
    AffineSubspace,
    Ball,
    BallSlice,
    ConvexPolyhedron,
    HalfSpace,
    ImplicitManifold,
    ProjectionError,
    Sphere,
    UnionOfSets,
    distance,
    inverse_projector_contains,
    project,
    sample_near,
)
from conftest import circle_manifold, half_disk_pair, line_through_origin

SIN45 = np.sin(np.pi / 4)


def cross_distance_oracle(x, grid=20001, extent=50.0):
    """Brute-force distance to the cross via a dense grid of cross points."""
    t = np.linspace(-extent, extent, grid)
    pts = np.concatenate([np.stack([t, np.zeros_like(t)], 1), np.stack([np.zeros_like(t), t], 1)])
    return np.min(np.linalg.norm(pts - np.asarray(x), axis=1))


class TestProjectExamples:
    def test_x_axis_drop(self, x_axis):
        r = project(x_axis, [1.0, 1.0])
        assert len(r.points) == 1
        npt.assert_allclose(r.points[0], [1.0, 0.0], atol=1e-12)
        assert r.distance == pytest.approx(1.0)

    def test_cross_symmetry_gives_both(self, cross):
        r = project(cross, [1.0, 1.0])
        got = sorted(tuple(p) for p in r.points)
        assert got == [(0.0, 1.0), (1.0, 0.0)]
        assert r.distance == pytest.approx(1.0)

    def test_circle_center_degenerate(self, unit_circle):
        r = project(unit_circle, [0.0, 0.0])
        assert r.degenerate
        assert r.distance == pytest.approx(1.0)
        for p in r.points:
            assert np.linalg.norm(p) == pytest.approx(1.0)

    def test_ball_outside(self, unit_ball):
        assert distance(unit_ball, [2.0, 0.0]) == pytest.approx(1.0)

    def test_line_45_distance(self, diag_line):
        assert distance(diag_line, [1.0, 0.0]) == pytest.approx(SIN45)

    def test_cross_distance(self, cross):
        assert distance(cross, [3.0, 1.0]) == pytest.approx(1.0)
        assert distance(cross, [3.0, 1.0]) == pytest.approx(cross_distance_oracle([3.0, 1.0]), abs=1e-3)

    def test_halfspace(self, left_halfplane):
        r = project(left_halfplane, [2.0, 0.5])
        npt.assert_allclose(r.points[0], [0.0, 0.5], atol=1e-12)
        assert r.distance == pytest.approx(2.0)
        assert distance(left_halfplane, [-1.0, 3.0]) == 0.0

    def test_polyhedron_vertex(self, quadrant):
        r = project(quadrant, [-1.0, -1.0])
        npt.assert_allclose(r.points[0], [0.0, 0.0], atol=1e-12)
        r2 = project(quadrant, [-1.0, 2.0])
        npt.assert_allclose(r2.points[0], [0.0, 2.0], atol=1e-12)

    def test_dimension_mismatch_raises(self, x_axis):
        with pytest.raises(ValueError):
            project(x_axis, [1.0, 2.0, 3.0])


class TestBallSlice:
    def test_matches_disk_when_constraint_inactive(self):
        s = BallSlice(np.zeros(2), 1.0, np.array([[1.0, 0.0]]), np.array([0.5]))
        npt.assert_allclose(project(s, [0.0, 3.0]).points[0], [0.0, 1.0], atol=1e-12)

    def test_flat_face(self):
        s = BallSlice(np.zeros(2), 1.0, np.array([[1.0, 0.0]]), np.array([0.0]))
        npt.assert_allclose(project(s, [0.5, 0.2]).points[0], [0.0, 0.2], atol=1e-12)

    def test_edge_of_face_and_arc(self):
        s = BallSlice(np.zeros(2), 1.0, np.array([[1.0, 0.0]]), np.array([0.0]))
        # Query in the sector "beyond" the face corner projects onto the corner.
        npt.assert_allclose(project(s, [1.0, 2.0]).points[0], [0.0, 1.0], atol=1e-10)
        # Query outside the arc projects radially.
        npt.assert_allclose(project(s, [-2.0, 0.0]).points[0], [-1.0, 0.0], atol=1e-10)

    def test_brute_force_agreement(self):
        A, B = half_disk_pair()
        rng = np.random.default_rng(5)
        theta = rng.uniform(0, 2 * np.pi, 4000)
        rad = np.sqrt(rng.uniform(0, 1, 4000))
        grid = np.stack([rad * np.cos(theta), rad * np.sin(theta)], 1)
        inB = grid[(grid[:, 1] <= grid[:, 0] + 1e-12) & (grid[:, 0] <= 2 * grid[:, 1] + 1e-12)]
        for x in ([0.9, 0.1], [0.3, -0.4], [-0.2, 0.2], [1.5, 0.6]):
            oracle = np.min(np.linalg.norm(inB - np.asarray(x), axis=1))
            assert distance(B, x) <= oracle + 1e-9
            assert distance(B, x) >= oracle - 0.05  # grid resolution slack


class TestManifold:
    def test_circle_projection(self):
        m = circle_manifold()
        p = project(m, [2.0, 0.0])
        assert p.local
        npt.assert_allclose(p.points[0], [1.0, 0.0], atol=1e-9)
        assert p.distance == pytest.approx(1.0, abs=1e-9)

    def test_circle_projection_generic_point(self):
        m = circle_manifold()
        p = project(m, [0.3, 0.4]).points[0]
        npt.assert_allclose(p, [0.6, 0.8], atol=1e-9)

    def test_rank_deficient_reference_rejected(self):
        with pytest.raises(ValueError):
            ImplicitManifold(lambda x: np.array([x[0] ** 2]),
                             lambda x: np.array([[2 * x[0], 0.0]]),
                             np.zeros(2), 1)

    def test_nonconvergence_carries_iterate(self):
        # A residual whose Jacobian never vanishes but whose zero set is empty.
        m = ImplicitManifold(lambda x: np.array([x[0] ** 2 + x[1] ** 2 - 1.0]),
                             lambda x: 2 * x[None, :], np.array([1.0, 0.0]), 1)
        with pytest.raises(ProjectionError) as err:
            # Center of the circle: Gauss-Newton stalls on the singular system.
            project(m, [0.0, 0.0])
        assert err.value.last_iterate is not None


class TestInverseProjector:
    def test_circle_radial_ray(self, unit_circle):
        assert inverse_projector_contains(unit_circle, [1.0, 0.0], [3.0, 0.0])
        assert not inverse_projector_contains(unit_circle, [1.0, 0.0], [0.0, 2.0])

    def test_cross_diagonal(self, cross):
        for t in (0.5, 1.0, 2.0):
            assert not inverse_projector_contains(cross, [0.0, 0.0], [t, t])
            # oracle: the grid distance is strictly below ||x||
            assert cross_distance_oracle([t, t]) < np.hypot(t, t) - 1e-6

    def test_requires_membership(self, unit_circle):
        with pytest.raises(ValueError):
            inverse_projector_contains(unit_circle, [0.5, 0.0], [2.0, 0.0])


class TestSampling:
    def test_line_samples(self, x_axis):
        pts = sample_near(x_axis, [0.0, 0.0], 1.0, 5, seed=7)
        assert pts.shape == (5, 2)
        assert np.all(np.abs(pts[:, 0]) < 1.0)
        npt.assert_allclose(pts[:, 1], 0.0, atol=1e-12)

    def test_sphere_arc(self, unit_circle):
        pts = sample_near(unit_circle, [1.0, 0.0], 0.1, 64, seed=3)
        assert len(pts) > 0
        npt.assert_allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-9)
        assert np.all(np.linalg.norm(pts - [1.0, 0.0], axis=1) < 0.1)

    def test_disjoint_ball_empty(self, unit_ball):
        pts = sample_near(unit_ball, [4.0, 0.0], 1.0, 32, seed=1)
        assert pts.shape[0] == 0

    def test_determinism(self, cross):
        a = sample_near(cross, [0.0, 0.0], 1.0, 20, seed=11)
        b = sample_near(cross, [0.0, 0.0], 1.0, 20, seed=11)
        npt.assert_array_equal(a, b)
        c = sample_near(cross, [0.0, 0.0], 1.0, 20, seed=12)
        assert not np.array_equal(a, c)

    def test_manifold_samples(self):
        m = circle_manifold()
        pts = sample_near(m, [1.0, 0.0], 0.3, 16, seed=2)
        assert len(pts) > 0
        npt.assert_allclose(pts[:, 0] ** 2 + pts[:, 1] ** 2, 1.0, atol=1e-8)


@st.composite
def random_convex_set(draw):
    kind = draw(st.sampled_from(["affine", "halfspace", "ball", "polyhedron"]))
    seed = draw(st.integers(0, 2**31 - 1))
    rng = np.random.default_rng(seed)
    if kind == "affine":
        d = rng.normal(size=2)
        return line_through_origin(d if np.linalg.norm(d) > 1e-6 else [1.0, 0.0])
    if kind == "halfspace":
        d = rng.normal(size=2)
        d = d / np.linalg.norm(d) if np.linalg.norm(d) > 1e-6 else np.array([1.0, 0.0])
        return HalfSpace(d, float(rng.normal()))
    if kind == "ball":
        return Ball(rng.normal(size=2), float(rng.uniform(0.5, 2.0)))
    return ConvexPolyhedron(np.array([[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]]),
                            np.array([0.0, 0.0, float(rng.uniform(1.0, 3.0))]))


class TestInvariants:
    @settings(max_examples=60, deadline=None)
    @given(random_convex_set(), st.integers(0, 10_000))
    def test_projection_idempotent_and_member(self, spec, pointseed):
        rng = np.random.default_rng(pointseed)
        x = rng.normal(size=2) * 3
        res = spec.project(x)
        for p in res.points:
            assert spec.contains(p, 1e-9)
            assert abs(np.linalg.norm(x - p) - res.distance) <= 1e-9
            again = spec.project(p)
            assert again.distance <= 1e-9

    @settings(max_examples=60, deadline=None)
    @given(random_convex_set(), st.integers(0, 10_000))
    def test_nonexpansive_on_convex(self, spec, pointseed):
        rng = np.random.default_rng(pointseed)
        x, y = rng.normal(size=2) * 3, rng.normal(size=2) * 3
        px = spec.project(x).points[0]
        py = spec.project(y).points[0]
        assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 1e-9

    def test_union_distance_is_member_min(self, cross, x_axis, y_axis):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(200, 2)) * 2
        d_union = cross.distances(X)
        d_min = np.minimum(x_axis.distances(X), y_axis.distances(X))
        npt.assert_array_equal(d_union, d_min)

    def test_multivalued_projection_idempotent(self, cross):
        res = cross.project(np.array([2.0, 2.0]))
        for p in res.points:
            r2 = cross.project(p)
            assert r2.distance == 0.0
            assert any(np.allclose(p, q) for q in r2.points)
