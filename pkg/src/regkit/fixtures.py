"""Built-in desk-scale scenarios: the worked examples and the regression battery.

These drive the `verify --suite paper` command and the acceptance tests.
Every scenario carries an exact intersection description.
"""

from __future__ import annotations

import numpy as np

from .sets import (
    AffineSubspace,
    Ball,
    BallSlice,
    ConvexPolyhedron,
    HalfSpace,
    ImplicitManifold,
    SetSpec,
    Sphere,
    UnionOfSets,
)
from .transversal import PairScenario, intersect_specs

__all__ = [
    "line_through",
    "point_set",
    "cross_set",
    "half_disk_sets",
    "circle_manifold",
    "linear_manifold",
    "scenario_e5",
    "scenario_e3",
    "scenario_orthogonal",
    "scenario_interior",
    "scenario_circle_tangent_line",
    "scenario_circle_secant_line",
    "scenario_cross_diag",
    "scenario_cross_xaxis",
    "scenario_halfspaces_vertex",
    "scenario_half_disks",
    "scenario_ball_halfplane_tangent",
    "random_line_pair",
    "random_subspace_pair",
    "paper_battery",
]

SQ2 = np.sqrt(2.0)


def line_through(direction, offset=None) -> AffineSubspace:
    d = np.asarray(direction, dtype=float)
    off = np.zeros(d.shape[0]) if offset is None else np.asarray(offset, dtype=float)
    return AffineSubspace((d / np.linalg.norm(d))[None, :], off)


def point_set(point) -> AffineSubspace:
    p = np.asarray(point, dtype=float)
    return AffineSubspace(np.zeros((0, p.shape[0])), p)


def cross_set() -> UnionOfSets:
    return UnionOfSets((line_through([1.0, 0.0]), line_through([0.0, 1.0])))


def half_disk_sets() -> tuple[UnionOfSets, BallSlice]:
    slice_up = BallSlice(np.zeros(2), 1.0, np.array([[1.0, -1.0]]), np.zeros(1))
    slice_down = BallSlice(np.zeros(2), 1.0, np.array([[1.0, 1.0]]), np.zeros(1))
    A = UnionOfSets((slice_up, slice_down))
    B = BallSlice(np.zeros(2), 1.0, np.array([[-1.0, 1.0], [1.0, -2.0]]), np.zeros(2))
    return A, B


def circle_manifold(center=(0.0, 0.0), radius=1.0, reference=None) -> ImplicitManifold:
    c = np.asarray(center, dtype=float)
    r = float(radius)
    ref = np.asarray(reference, dtype=float) if reference is not None else c + np.array([r, 0.0])

    def func(x):
        return np.array([float(np.sum((x - c) ** 2)) - r**2])

    def jac(x):
        return 2.0 * (np.asarray(x, dtype=float) - c)[None, :]

    return ImplicitManifold(func, jac, ref, 1, name="circle")


def linear_manifold(normal_rows, offset) -> ImplicitManifold:
    """An affine subspace presented as an implicit manifold (for tangent ops)."""
    N = np.atleast_2d(np.asarray(normal_rows, dtype=float))
    p = np.asarray(offset, dtype=float)

    def func(x):
        return N @ (np.asarray(x, dtype=float) - p)

    def jac(x):
        return N

    return ImplicitManifold(func, jac, p, N.shape[0], name="linear")


def scenario_e5(delta=0.5, budget=2048, seed=7) -> PairScenario:
    """The x-axis against the 45-degree line through the origin."""
    return PairScenario("e5", line_through([1.0, 0.0]), line_through([1.0, 1.0]),
                        np.zeros(2), point_set([0.0, 0.0]), delta, budget, seed)


def scenario_e3(delta=0.5, budget=2048, seed=7) -> PairScenario:
    """Two copies of the same line: subtransversal (sr = 1) but not transversal."""
    line = line_through([1.0, 0.0])
    return PairScenario("e3", line, line_through([1.0, 0.0]), np.zeros(2),
                        line_through([1.0, 0.0]), delta, budget, seed)


def scenario_orthogonal(delta=0.5, budget=2048, seed=7) -> PairScenario:
    return PairScenario("orthogonal-lines", line_through([1.0, 0.0]), line_through([0.0, 1.0]),
                        np.zeros(2), point_set([0.0, 0.0]), delta, budget, seed)


def scenario_interior(delta=0.15, budget=1024, seed=7) -> PairScenario:
    """Two overlapping disks observed at an interior point: sr = r = infinity."""
    a = Ball(np.zeros(2), 1.0)
    b = Ball(np.array([0.5, 0.0]), 1.0)
    inter, certified = intersect_specs(a, b)
    if inter is None or not certified:
        # lens of two disks: keep the exact description via ball slices is not
        # possible; the scenario only ever samples deep inside, where the
        # intersection locally agrees with either disk.
        inter = Ball(np.array([0.25, 0.0]), 0.55)
    return PairScenario("interior", a, b, np.array([0.25, 0.0]), inter, delta, budget, seed)


def scenario_circle_tangent_line(delta=0.4, budget=1024, seed=7) -> PairScenario:
    """Unit circle touching the x-axis at the origin: transversality fails."""
    circle = Sphere(np.array([0.0, 1.0]), 1.0)
    return PairScenario("circle-tangent-line", circle, line_through([1.0, 0.0]),
                        np.zeros(2), point_set([0.0, 0.0]), delta, budget, seed)


def scenario_circle_secant_line(delta=0.4, budget=1024, seed=7) -> PairScenario:
    """Unit circle crossed by the x-axis at (1, 0): transversal."""
    circle = Sphere(np.zeros(2), 1.0)
    inter = UnionOfSets((point_set([1.0, 0.0]), point_set([-1.0, 0.0])))
    return PairScenario("circle-secant-line", circle, line_through([1.0, 0.0]),
                        np.array([1.0, 0.0]), inter, delta, budget, seed)


def scenario_cross_diag(delta=0.5, budget=2048, seed=7) -> PairScenario:
    return PairScenario("cross-diag", cross_set(), line_through([1.0, 1.0]),
                        np.zeros(2), point_set([0.0, 0.0]), delta, budget, seed)


def scenario_cross_xaxis(delta=0.5, budget=1024, seed=7) -> PairScenario:
    """The cross against one of its own branches: B inside A."""
    return PairScenario("cross-xaxis", cross_set(), line_through([1.0, 0.0]),
                        np.zeros(2), line_through([1.0, 0.0]), delta, budget, seed)


def scenario_halfspaces_vertex(delta=0.5, budget=1024, seed=7) -> PairScenario:
    a = HalfSpace(np.array([1.0, 0.0]), 0.0)
    b = HalfSpace(np.array([0.0, 1.0]), 0.0)
    inter = ConvexPolyhedron(np.array([[1.0, 0.0], [0.0, 1.0]]), np.zeros(2))
    return PairScenario("halfspaces-vertex", a, b, np.zeros(2), inter, delta, budget, seed)


def scenario_half_disks(delta=0.4, budget=1024, seed=7) -> PairScenario:
    A, B = half_disk_sets()
    ray = BallSlice(np.zeros(2), 1.0,
                    np.array([[1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]]), np.zeros(3))
    return PairScenario("half-disks", A, B, np.zeros(2), ray, delta, budget, seed)


def scenario_ball_halfplane_tangent(delta=0.3, budget=1024, seed=7) -> PairScenario:
    """Unit disk against a supporting half-plane: not subtransversal."""
    a = Ball(np.zeros(2), 1.0)
    b = HalfSpace(np.array([-1.0, 0.0]), -1.0)  # {x1 >= 1}
    return PairScenario("ball-halfplane-tangent", a, b, np.array([1.0, 0.0]),
                        point_set([1.0, 0.0]), delta, budget, seed)


def random_line_pair(seed: int, delta=0.5, budget=1024) -> PairScenario:
    """Two distinct lines through the origin in the plane, seeded."""
    rng = np.random.default_rng(seed)
    while True:
        th1, th2 = rng.uniform(0, np.pi, 2)
        if abs(np.sin(th1 - th2)) > 0.1:
            break
    a = line_through([np.cos(th1), np.sin(th1)])
    b = line_through([np.cos(th2), np.sin(th2)])
    return PairScenario(f"line-pair-{seed}", a, b, np.zeros(2), point_set([0.0, 0.0]),
                        delta, budget, seed)


def random_subspace_pair(seed: int, dim: int | None = None, delta=0.5,
                         budget=1024) -> PairScenario:
    """A transversal-or-not random pair of linear subspaces in dimension 2..5."""
    rng = np.random.default_rng(seed)
    n = int(dim if dim is not None else rng.integers(2, 6))
    k1 = int(rng.integers(1, n))
    k2 = int(rng.integers(1, n))
    from .cones import orthonormal_rows

    b1 = orthonormal_rows(rng.normal(size=(k1, n)))
    b2 = orthonormal_rows(rng.normal(size=(k2, n)))
    a = AffineSubspace(b1, np.zeros(n))
    b = AffineSubspace(b2, np.zeros(n))
    inter, certified = intersect_specs(a, b)
    assert certified and inter is not None  # subspaces always share the origin
    return PairScenario(f"subspace-pair-{seed}-d{n}", a, b, np.zeros(n), inter,
                        delta, budget, seed)


def paper_battery(budget: int = 1024) -> list[PairScenario]:
    """The 20-scenario fixture battery behind the verification suite."""
    named = [
        scenario_e5(budget=budget),
        scenario_e3(budget=budget),
        scenario_orthogonal(budget=budget),
        scenario_interior(budget=budget),
        scenario_circle_tangent_line(budget=budget),
        scenario_circle_secant_line(budget=budget),
        scenario_cross_diag(budget=budget),
        scenario_cross_xaxis(budget=budget),
        scenario_halfspaces_vertex(budget=budget),
        scenario_half_disks(budget=budget),
        scenario_ball_halfplane_tangent(budget=budget),
    ]
    lines = [random_line_pair(seed, budget=budget) for seed in (101, 102, 103, 104, 105)]
    subs = [random_subspace_pair(seed, dim=3, budget=budget) for seed in (201, 202)] + \
           [random_subspace_pair(seed, dim=4, budget=budget) for seed in (203, 204)]
    return named + lines + subs
