"""Shared geometric fixtures for the test suite."""

import numpy as np
import pytest

from regkit.sets import (
    AffineSubspace,
    Ball,
    BallSlice,
    ConvexPolyhedron,
    HalfSpace,
    ImplicitManifold,
    Sphere,
    UnionOfSets,
)

SQ2 = np.sqrt(2.0)


def line_through_origin(direction):
    d = np.asarray(direction, dtype=float)
    return AffineSubspace((d / np.linalg.norm(d))[None, :], np.zeros(d.shape[0]))


@pytest.fixture
def x_axis():
    return line_through_origin([1.0, 0.0])


@pytest.fixture
def y_axis():
    return line_through_origin([0.0, 1.0])


@pytest.fixture
def diag_line():
    return line_through_origin([1.0, 1.0])


@pytest.fixture
def cross(x_axis, y_axis):
    return UnionOfSets((x_axis, y_axis))


@pytest.fixture
def unit_circle():
    return Sphere(np.zeros(2), 1.0)


@pytest.fixture
def unit_ball():
    return Ball(np.zeros(2), 1.0)


@pytest.fixture
def left_halfplane():
    return HalfSpace(np.array([1.0, 0.0]), 0.0)


@pytest.fixture
def quadrant():
    # Nonnegative quadrant {x >= 0, y >= 0}.
    return ConvexPolyhedron(np.array([[-1.0, 0.0], [0.0, -1.0]]), np.zeros(2))


def circle_manifold(center=(0.0, 0.0), radius=1.0, reference=None):
    c = np.asarray(center, dtype=float)
    r = float(radius)
    ref = np.asarray(reference, dtype=float) if reference is not None else c + np.array([r, 0.0])

    def func(x):
        return np.array([np.sum((x - c) ** 2) - r**2])

    def jac(x):
        return 2.0 * (x - c)[None, :]

    return ImplicitManifold(func, jac, ref, 1, name="circle")


def half_disk_pair():
    """The two quarter-disk sets meeting along the 45-degree ray at the origin."""
    # A: unit disk cut to {x1 <= |x2|}; union of two convex slices.
    slice_up = BallSlice(np.zeros(2), 1.0, np.array([[1.0, -1.0]]), np.zeros(1))
    slice_down = BallSlice(np.zeros(2), 1.0, np.array([[1.0, 1.0]]), np.zeros(1))
    A = UnionOfSets((slice_up, slice_down))
    # B: unit disk cut to the sector {x2 <= x1 <= 2 x2}.
    B = BallSlice(np.zeros(2), 1.0, np.array([[-1.0, 1.0], [1.0, -2.0]]), np.zeros(2))
    return A, B


@pytest.fixture
def half_disk_A():
    return half_disk_pair()[0]


@pytest.fixture
def half_disk_B():
    return half_disk_pair()[1]
