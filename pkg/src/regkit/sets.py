"""Structured closed sets in R^n with exact projectors and seeded sampling.

Every set description carries an exact (possibly multi-valued) projector,
an exact distance, a membership test and a deterministic in-set sampler.
All values are plain float64 ndarrays; nothing here mutates its inputs, so
instances are safe to share across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import null_space as scipy_null_space

__all__ = [
    "MEMBERSHIP_TOL",
    "TIE_TOL",
    "ProjectionError",
    "ProjectionResult",
    "SetSpec",
    "AffineSubspace",
    "HalfSpace",
    "Ball",
    "Sphere",
    "ConvexPolyhedron",
    "BallSlice",
    "ImplicitManifold",
    "UnionOfSets",
    "project",
    "distance",
    "inverse_projector_contains",
    "sample_near",
    "make_rng",
    "uniform_ball",
]

# Absolute membership tolerance for coordinates of order one; the relative
# tie tolerance decides which branches of a multi-valued projector are kept.
MEMBERSHIP_TOL = 1e-9
TIE_TOL = 1e-9

# Gauss-Newton settings for manifold projection (local projection only).
_GN_MAX_ITER = 100
_GN_STEP_TOL = 1e-12


class ProjectionError(RuntimeError):
    """Projection subproblem did not converge; carries the last iterate."""

    def __init__(self, message: str, last_iterate: np.ndarray | None = None):
        super().__init__(message)
        self.last_iterate = last_iterate


@dataclass(frozen=True)
class ProjectionResult:
    """All global minimizers of ``||a - x||`` over a set (a selection thereof).

    ``degenerate`` marks a genuinely infinite projector (sphere center), in
    which case ``points`` holds seeded representatives only.  ``local`` marks
    a manifold projection found by a local solver.
    """

    points: tuple
    distance: float
    degenerate: bool = False
    local: bool = False

    def closest(self) -> np.ndarray:
        return self.points[0]


def make_rng(seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based generator: reproducible per (seed, index), order-free."""
    return np.random.Generator(np.random.Philox(key=np.uint64(seed) + (np.uint64(index) << np.uint64(32))))


def uniform_ball(rng: np.random.Generator, center: np.ndarray, radius: float, count: int) -> np.ndarray:
    """Uniform samples from the closed ball B_radius(center)."""
    n = center.shape[0]
    g = rng.normal(size=(count, n))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    r = rng.random(size=(count, 1)) ** (1.0 / n)
    return center + radius * r * g / norms


def _as_point(x) -> np.ndarray:
    p = np.asarray(x, dtype=float)
    if p.ndim != 1:
        raise ValueError(f"point must be one-dimensional, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite entries")
    return p


def _dedupe(points: list, tol: float) -> list:
    kept: list = []
    for p in points:
        if all(np.linalg.norm(p - q) > tol for q in kept):
            kept.append(p)
    return kept


class SetSpec:
    """Base for structured closed sets; subclasses implement the variant."""

    dim: int
    convex: bool = False

    # -- single-point interface -------------------------------------------
    def project(self, x) -> ProjectionResult:
        raise NotImplementedError

    def distance(self, x) -> float:
        return self.project(x).distance

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        return self.distance(x) <= tol

    # -- batch interface ---------------------------------------------------
    def distances(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([self.distance(x) for x in X])

    def project_points(self, X: np.ndarray) -> np.ndarray:
        """One selected nearest point per row (lexicographically smallest)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.array([lex_selection(self.project(x).points) for x in X])

    # -- sampling -----------------------------------------------------------
    def sample_near(self, center, delta: float, count: int, seed: int) -> np.ndarray:
        """Deterministic points of the set inside B_delta(center); may be empty."""
        raise NotImplementedError

    # -- geometry helpers ----------------------------------------------------
    def translate(self, shift) -> "SetSpec":
        raise NotImplementedError

    def _check_dim(self, x: np.ndarray):
        if x.shape[-1] != self.dim:
            raise ValueError(f"dimension mismatch: set is {self.dim}-dimensional, point has {x.shape[-1]}")


def lex_selection(points: Sequence[np.ndarray]) -> np.ndarray:
    """Lexicographically smallest point; the default multi-valued selection."""
    return min(points, key=lambda p: tuple(p))


# ---------------------------------------------------------------------------
# Affine subspace
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AffineSubspace(SetSpec):
    """offset + span(rows of basis); basis rows orthonormal, possibly none."""

    basis: np.ndarray
    offset: np.ndarray
    convex: bool = field(default=True, init=False)

    def __post_init__(self):
        basis = np.atleast_2d(np.asarray(self.basis, dtype=float))
        offset = _as_point(self.offset)
        if basis.size == 0:
            basis = np.zeros((0, offset.shape[0]))
        if basis.shape[1] != offset.shape[0]:
            raise ValueError("basis/offset dimension mismatch")
        if basis.shape[0] and not np.allclose(basis @ basis.T, np.eye(basis.shape[0]), atol=1e-9):
            raise ValueError("basis rows must be orthonormal")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "dim", offset.shape[0])

    def project(self, x) -> ProjectionResult:
        x = _as_point(x)
        self._check_dim(x)
        d = x - self.offset
        p = self.offset + (d @ self.basis.T) @ self.basis if self.basis.shape[0] else self.offset.copy()
        return ProjectionResult((p,), float(np.linalg.norm(x - p)))

    def distances(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        D = X - self.offset
        if self.basis.shape[0]:
            D = D - (D @ self.basis.T) @ self.basis
        return np.linalg.norm(D, axis=1)

    def project_points(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        D = X - self.offset
        if self.basis.shape[0]:
            return self.offset + (D @ self.basis.T) @ self.basis
        return np.tile(self.offset, (X.shape[0], 1))

    def sample_near(self, center, delta, count, seed):
        center = _as_point(center)
        base = self.project(center).closest()
        gap_sq = delta**2 - float(np.linalg.norm(center - base)) ** 2
        if gap_sq <= 0:
            return np.zeros((0, self.dim))
        if self.basis.shape[0] == 0:
            return base[None, :]
        rng = make_rng(seed)
        u = uniform_ball(rng, np.zeros(self.basis.shape[0]), np.sqrt(gap_sq) * (1 - 1e-12), count)
        return base + u @ self.basis

    def translate(self, shift):
        return AffineSubspace(self.basis, self.offset + _as_point(shift))


# ---------------------------------------------------------------------------
# Half-space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HalfSpace(SetSpec):
    """{x : <normal, x> <= offset} with a unit outward normal."""

    normal: np.ndarray
    offset: float
    convex: bool = field(default=True, init=False)

    def __post_init__(self):
        normal = _as_point(self.normal)
        nn = np.linalg.norm(normal)
        if not np.isclose(nn, 1.0, atol=1e-9):
            raise ValueError("half-space normal must be a unit vector")
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "dim", normal.shape[0])

    def project(self, x) -> ProjectionResult:
        x = _as_point(x)
        self._check_dim(x)
        excess = max(float(self.normal @ x) - self.offset, 0.0)
        p = x - excess * self.normal
        return ProjectionResult((p,), excess)

    def distances(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.maximum(X @ self.normal - self.offset, 0.0)

    def project_points(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        excess = np.maximum(X @ self.normal - self.offset, 0.0)
        return X - excess[:, None] * self.normal

    def sample_near(self, center, delta, count, seed):
        center = _as_point(center)
        rng = make_rng(seed)
        raw = uniform_ball(rng, center, delta, count)
        pts = self.project_points(raw)
        keep = np.linalg.norm(pts - center, axis=1) < delta
        return pts[keep]

    def translate(self, shift):
        shift = _as_point(shift)
        return HalfSpace(self.normal, self.offset + float(self.normal @ shift))


# ---------------------------------------------------------------------------
# Ball and sphere
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Ball(SetSpec):
    center: np.ndarray
    radius: float
    convex: bool = field(default=True, init=False)

    def __post_init__(self):
        center = _as_point(self.center)
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "dim", center.shape[0])

    def project(self, x) -> ProjectionResult:
        x = _as_point(x)
        self._check_dim(x)
        d = x - self.center
        nd = float(np.linalg.norm(d))
        if nd <= self.radius:
            return ProjectionResult((x.copy(),), 0.0)
        p = self.center + self.radius * d / nd
        return ProjectionResult((p,), nd - self.radius)

    def distances(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.maximum(np.linalg.norm(X - self.center, axis=1) - self.radius, 0.0)

    def project_points(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        D = X - self.center
        nd = np.linalg.norm(D, axis=1)
        scale = np.where(nd > self.radius, self.radius / np.maximum(nd, 1e-300), 1.0)
        return self.center + D * scale[:, None]

    def sample_near(self, center, delta, count, seed):
        center = _as_point(center)
        rng = make_rng(seed)
        raw = uniform_ball(rng, center, delta, count)
        pts = self.project_points(raw)
        keep = np.linalg.norm(pts - center, axis=1) < delta
        return pts[keep]

    def translate(self, shift):
        return Ball(self.center + _as_point(shift), self.radius)


@dataclass(frozen=True)
class Sphere(SetSpec):
    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = _as_point(self.center)
        if self.radius <= 0:
            raise ValueError("sphere radius must be positive")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "dim", center.shape[0])

    def project(self, x, representative_count: int = 8, seed: int = 0) -> ProjectionResult:
        x = _as_point(x)
        self._check_dim(x)
        d = x - self.center
        nd = float(np.linalg.norm(d))
        if nd <= MEMBERSHIP_TOL:
            # Center: every sphere point is nearest; return seeded representatives.
            rng = make_rng(seed)
            g = rng.normal(size=(representative_count, self.dim))
            g /= np.linalg.norm(g, axis=1, keepdims=True)
            pts = tuple(self.center + self.radius * u for u in g)
            return ProjectionResult(pts, self.radius, degenerate=True)
        p = self.center + self.radius * d / nd
        return ProjectionResult((p,), abs(nd - self.radius))

    def distances(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.abs(np.linalg.norm(X - self.center, axis=1) - self.radius)

    def project_points(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        D = X - self.center
        nd = np.linalg.norm(D, axis=1)
        safe = np.maximum(nd, 1e-300)
        return self.center + self.radius * D / safe[:, None]

    def sample_near(self, center, delta, count, seed):
        center = _as_point(center)
        rng = make_rng(seed)
        d0 = float(np.linalg.norm(center - self.center))
        if d0 <= MEMBERSHIP_TOL:
            # Query at the sphere center: the admissible cap is all or nothing.
            if self.radius >= delta:
                return np.zeros((0, self.dim))
            dirs = rng.normal(size=(count, self.dim))
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
            return self.center + self.radius * dirs
        # Law of cosines: admissible cap half-angle around the facing direction.
        cos_w = (self.radius**2 + d0**2 - delta**2) / (2 * self.radius * d0)
        if cos_w >= 1.0:
            return np.zeros((0, self.dim))
        w = float(np.arccos(np.clip(cos_w, -1.0, 1.0)))
        u0 = (center - self.center) / d0
        tang = scipy_null_space(u0[None, :])
        s = uniform_ball(rng, np.zeros(self.dim - 1), 1.0, count)
        ns = np.linalg.norm(s, axis=1)
        phi = w * ns
        tdir = np.where(ns[:, None] > 1e-300, s / np.maximum(ns, 1e-300)[:, None], 0.0) @ tang.T
        dirs = np.cos(phi)[:, None] * u0 + np.sin(phi)[:, None] * tdir
        pts = self.center + self.radius * dirs
        keep = np.linalg.norm(pts - center, axis=1) < delta
        return pts[keep]

    def translate(self, shift):
        return Sphere(self.center + _as_point(shift), self.radius)


# ---------------------------------------------------------------------------
# Convex polyhedron (finite half-space intersection) via active-set enumeration
# ---------------------------------------------------------------------------

def _affine_projection_operator(A_active: np.ndarray, b_active: np.ndarray):
    """Return map X -> projection of X onto {y : A y = b}, or None if empty."""
    # Minimal-norm multipliers via pseudo-inverse; consistency checked by caller.
    M = np.linalg.pinv(A_active @ A_active.T, rcond=1e-12)

    def apply(X: np.ndarray) -> np.ndarray:
        resid = X @ A_active.T - b_active
        return X - (resid @ M) @ A_active

    return apply


@dataclass(frozen=True)
class ConvexPolyhedron(SetSpec):
    """{x : normals @ x <= offsets}; rows need not be normalized."""

    normals: np.ndarray
    offsets: np.ndarray
    convex: bool = field(default=True, init=False)

    def __post_init__(self):
        normals = np.atleast_2d(np.asarray(self.normals, dtype=float))
        offsets = np.atleast_1d(np.asarray(self.offsets, dtype=float))
        if normals.shape[0] != offsets.shape[0]:
            raise ValueError("normals/offsets length mismatch")
        if normals.shape[0] == 0:
            raise ValueError("polyhedron needs at least one constraint")
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "dim", normals.shape[1])

    def _feasible(self, X: np.ndarray, tol: float) -> np.ndarray:
        return np.all(X @ self.normals.T - self.offsets <= tol, axis=1)

    def project_points(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        m = self.normals.shape[0]
        best = np.full(X.shape[0], np.inf)
        proj = X.copy()
        scale = 1.0 + np.abs(self.offsets).max()
        for size in range(0, m + 1):
            for S in itertools.combinations(range(m), size):
                if size == 0:
                    cand = X
                else:
                    A_S = self.normals[list(S)]
                    b_S = self.offsets[list(S)]
                    cand = _affine_projection_operator(A_S, b_S)(X)
                    consistent = np.max(np.abs(cand @ A_S.T - b_S), axis=1) <= 1e-8 * scale
                feas = self._feasible(cand, 1e-9 * scale)
                if size:
                    feas &= consistent
                d = np.linalg.norm(cand - X, axis=1)
                better = feas & (d < best - 1e-15)
                best[better] = d[better]
                proj[better] = cand[better]
        if np.any(np.isinf(best)):
            raise ProjectionError("polyhedron appears empty: no feasible projection candidate")
        return proj

    def project(self, x) -> ProjectionResult:
        x = _as_point(x)
        self._check_dim(x)
        p = self.project_points(x[None, :])[0]
        return ProjectionResult((p,), float(np.linalg.norm(x - p)))

    def distances(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.linalg.norm(self.project_points(X) - X, axis=1)

    def active_constraints(self, x, tol: float = 1e-9) -> np.ndarray:
        x = _as_point(x)
        res = self.normals @ x - self.offsets
        return np.nonzero(np.abs(res) <= tol * (1.0 + np.abs(self.offsets)))[0]

    def sample_near(self, center, delta, count, seed):
        center = _as_point(center)
        rng = make_rng(seed)
        raw = uniform_ball(rng, center, delta, count)
        inside = self._feasible(raw, MEMBERSHIP_TOL)
        pts = raw.copy()
        if np.any(~inside):
            pts[~inside] = self.project_points(raw[~inside])
        keep = np.linalg.norm(pts - center, axis=1) < delta
        return pts[keep]

    def translate(self, shift):
        shift = _as_point(shift)
        return ConvexPolyhedron(self.normals, self.offsets + self.normals @ shift)


# ---------------------------------------------------------------------------
# Ball sliced by half-spaces (convex; exact projector by face enumeration)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BallSlice(SetSpec):
    """Ball intersected with finitely many half-spaces {x: normals x <= offsets}."""

    center: np.ndarray
    radius: float
    normals: np.ndarray
    offsets: np.ndarray
    convex: bool = field(default=True, init=False)

    def __post_init__(self):
        center = _as_point(self.center)
        normals = np.atleast_2d(np.asarray(self.normals, dtype=float))
        offsets = np.atleast_1d(np.asarray(self.offsets, dtype=float))
        if self.radius <= 0:
            raise ValueError("ball radius must be positive")
        if normals.shape[0] != offsets.shape[0]:
            raise ValueError("normals/offsets length mismatch")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "dim", center.shape[0])

    def _feasible(self, X: np.ndarray, tol: float) -> np.ndarray:
        ok = np.linalg.norm(X - self.center, axis=1) <= self.radius + tol
        if self.normals.shape[0]:
            ok &= np.all(X @ self.normals.T - self.offsets <= tol, axis=1)
        return ok

    def project_points(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        m = self.normals.shape[0]
        best = np.full(X.shape[0], np.inf)
        proj = X.copy()
        tol = 1e-9 * (1.0 + self.radius)
        for size in range(0, m + 1):
            for S in itertools.combinations(range(m), size):
                if size == 0:
                    flat = X.copy()
                    consistent = np.ones(X.shape[0], dtype=bool)
                    cl = self.center
                else:
                    A_S = self.normals[list(S)]
                    b_S = self.offsets[list(S)]
                    op = _affine_projection_operator(A_S, b_S)
                    flat = op(X)
                    consistent = np.max(np.abs(flat @ A_S.T - b_S), axis=1) <= 1e-8
                    cl = op(self.center[None, :])[0]
                # Candidate with ball inactive.
                for cand, extra_ok in self._sphere_candidates(X, flat, cl):
                    feas = self._feasible(cand, tol) & consistent & extra_ok
                    d = np.linalg.norm(cand - X, axis=1)
                    better = feas & (d < best - 1e-15)
                    best[better] = d[better]
                    proj[better] = cand[better]
        if np.any(np.isinf(best)):
            raise ProjectionError("ball slice appears empty: no feasible projection candidate")
        return proj

    def _sphere_candidates(self, X, flat, cl):
        # Flat-face candidate (ball constraint inactive).
        yield flat, np.ones(X.shape[0], dtype=bool)
        # Spherical-face candidate: radially map within the active affine slice.
        r_sq = self.radius**2 - float(np.linalg.norm(self.center - cl)) ** 2
        if r_sq < -1e-12 * (1 + self.radius**2):
            return
        if r_sq <= 0:
            # Tangency: the slice meets the sphere in the single point cl.
            yield np.tile(cl, (X.shape[0], 1)), np.ones(X.shape[0], dtype=bool)
            return
        w = flat - cl
        nw = np.linalg.norm(w, axis=1)
        ok = nw > 1e-12
        cand = np.where(
            ok[:, None], cl + np.sqrt(r_sq) * w / np.maximum(nw, 1e-300)[:, None], flat
        )
        yield cand, ok

    def project(self, x) -> ProjectionResult:
        x = _as_point(x)
        self._check_dim(x)
        p = self.project_points(x[None, :])[0]
        return ProjectionResult((p,), float(np.linalg.norm(x - p)))

    def distances(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.linalg.norm(self.project_points(X) - X, axis=1)

    def active_halfspaces(self, x, tol: float = 1e-9) -> np.ndarray:
        x = _as_point(x)
        if self.normals.shape[0] == 0:
            return np.zeros(0, dtype=int)
        res = self.normals @ x - self.offsets
        return np.nonzero(np.abs(res) <= tol * (1.0 + np.abs(self.offsets)))[0]

    def ball_active(self, x, tol: float = 1e-9) -> bool:
        return abs(np.linalg.norm(_as_point(x) - self.center) - self.radius) <= tol * (1 + self.radius)

    def sample_near(self, center, delta, count, seed):
        center = _as_point(center)
        rng = make_rng(seed)
        raw = uniform_ball(rng, center, delta, count)
        inside = self._feasible(raw, MEMBERSHIP_TOL)
        pts = raw.copy()
        if np.any(~inside):
            pts[~inside] = self.project_points(raw[~inside])
        keep = np.linalg.norm(pts - center, axis=1) < delta
        return pts[keep]

    def translate(self, shift):
        shift = _as_point(shift)
        offs = self.offsets + (self.normals @ shift if self.normals.shape[0] else 0.0)
        return BallSlice(self.center + shift, self.radius, self.normals, offs)


# ---------------------------------------------------------------------------
# Implicit manifold {x : F(x) = 0} with full-rank Jacobian at a reference point
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ImplicitManifold(SetSpec):
    """Zero set of F: R^n -> R^m with grad F of full row rank near the reference."""

    func: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    reference: np.ndarray
    codim: int
    name: str = "manifold"

    def __post_init__(self):
        ref = _as_point(self.reference)
        object.__setattr__(self, "reference", ref)
        object.__setattr__(self, "dim", ref.shape[0])
        J = np.atleast_2d(np.asarray(self.jacobian(ref), dtype=float))
        if J.shape != (self.codim, self.dim):
            raise ValueError("jacobian shape mismatch at the reference point")
        if np.linalg.matrix_rank(J, tol=1e-9) < self.codim:
            raise ValueError("jacobian is rank deficient at the reference point")
        if np.linalg.norm(np.atleast_1d(self.func(ref))) > 1e-7:
            raise ValueError("reference point does not satisfy F = 0")

    def residual(self, x) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.func(np.asarray(x, dtype=float)), dtype=float))

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        return float(np.linalg.norm(self.residual(x))) <= 100 * tol

    def project(self, x) -> ProjectionResult:
        x = _as_point(x)
        self._check_dim(x)
        y = x.copy()
        for _ in range(_GN_MAX_ITER):
            Fv = self.residual(y)
            J = np.atleast_2d(np.asarray(self.jacobian(y), dtype=float))
            rhs = Fv + J @ (x - y)
            try:
                lam = np.linalg.solve(J @ J.T, rhs)
            except np.linalg.LinAlgError:
                raise ProjectionError("singular Jacobian in manifold projection", y)
            z = x - J.T @ lam
            step = float(np.linalg.norm(z - y))
            y = z
            if step < _GN_STEP_TOL:
                break
        else:
            raise ProjectionError("projection-not-found: Gauss-Newton did not converge", y)
        if float(np.linalg.norm(self.residual(y))) > 1e-8:
            raise ProjectionError("projection-not-found: residual did not vanish", y)
        return ProjectionResult((y,), float(np.linalg.norm(x - y)), local=True)

    def tangent_basis(self, x) -> np.ndarray:
        """Orthonormal basis of ker grad F(x), rows."""
        J = np.atleast_2d(np.asarray(self.jacobian(np.asarray(x, dtype=float)), dtype=float))
        _, s, Vt = np.linalg.svd(J)
        rank = int(np.sum(s > 1e-10 * max(1.0, s[0] if s.size else 1.0)))
        if rank < self.codim:
            raise ValueError("jacobian is rank deficient; tangent space undefined")
        return Vt[rank:]

    def normal_basis(self, x) -> np.ndarray:
        """Orthonormal basis of range grad F(x)^T, rows."""
        J = np.atleast_2d(np.asarray(self.jacobian(np.asarray(x, dtype=float)), dtype=float))
        Q, R = np.linalg.qr(J.T)
        if np.linalg.matrix_rank(R, tol=1e-10) < self.codim:
            raise ValueError("jacobian is rank deficient; normal space undefined")
        return Q.T

    def sample_near(self, center, delta, count, seed):
        center = _as_point(center)
        try:
            base = self.project(center).closest()
        except ProjectionError:
            return np.zeros((0, self.dim))
        if np.linalg.norm(base - center) >= delta:
            return np.zeros((0, self.dim))
        T = self.tangent_basis(base)
        rng = make_rng(seed)
        u = uniform_ball(rng, np.zeros(T.shape[0]), delta, count)
        out = []
        for du in u:
            try:
                p = self.project(base + du @ T).closest()
            except ProjectionError:
                continue
            if np.linalg.norm(p - center) < delta:
                out.append(p)
        return np.array(out) if out else np.zeros((0, self.dim))

    def translate(self, shift):
        shift = _as_point(shift)
        f, jac = self.func, self.jacobian
        return ImplicitManifold(
            lambda x: f(x - shift), lambda x: jac(x - shift),
            self.reference + shift, self.codim, name=self.name,
        )


# ---------------------------------------------------------------------------
# Finite unions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UnionOfSets(SetSpec):
    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("union needs at least one member")
        dims = {m.dim for m in members}
        if len(dims) != 1:
            raise ValueError("union members must share the ambient dimension")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "dim", members[0].dim)

    def project(self, x) -> ProjectionResult:
        x = _as_point(x)
        self._check_dim(x)
        results = [m.project(x) for m in self.members]
        dmin = min(r.distance for r in results)
        tie = max(TIE_TOL * max(dmin, 1.0), TIE_TOL)
        pts: list = []
        degenerate = False
        local = False
        for r in results:
            if r.distance <= dmin + tie:
                pts.extend(r.points)
                degenerate |= r.degenerate
                local |= r.local
        return ProjectionResult(tuple(_dedupe(pts, tie)), dmin, degenerate=degenerate, local=local)

    def distances(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.min([m.distances(X) for m in self.members], axis=0)

    def distance(self, x):
        return float(min(m.distance(x) for m in self.members))

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        return any(m.contains(x, tol) for m in self.members)

    def sample_near(self, center, delta, count, seed):
        k = len(self.members)
        per = [count // k + (1 if i < count % k else 0) for i in range(k)]
        chunks = [m.sample_near(center, delta, c, seed + 977 * i)
                  for i, (m, c) in enumerate(zip(self.members, per)) if c > 0]
        chunks = [c for c in chunks if len(c)]
        return np.concatenate(chunks, axis=0) if chunks else np.zeros((0, self.dim))

    def branches_at(self, x, tol: float = MEMBERSHIP_TOL) -> list:
        """Indices of members containing x."""
        return [i for i, m in enumerate(self.members) if m.contains(x, tol)]

    def translate(self, shift):
        return UnionOfSets(tuple(m.translate(shift) for m in self.members))


# ---------------------------------------------------------------------------
# Module-level operations
# ---------------------------------------------------------------------------

def project(spec: SetSpec, x) -> ProjectionResult:
    return spec.project(x)


def distance(spec: SetSpec, x) -> float:
    return spec.distance(x)


def inverse_projector_contains(spec: SetSpec, a, x, tol: float = TIE_TOL) -> bool:
    """True iff a attains distance(spec, x), i.e. x is in the projector preimage of a."""
    a = _as_point(a)
    x = _as_point(x)
    if not spec.contains(a, 100 * MEMBERSHIP_TOL):
        raise ValueError("base point does not belong to the set")
    d = spec.distance(x)
    return float(np.linalg.norm(x - a)) <= d * (1 + tol) + MEMBERSHIP_TOL


def sample_near(spec: SetSpec, center, delta: float, count: int, seed: int) -> np.ndarray:
    if delta <= 0:
        raise ValueError("sampling radius must be positive")
    return spec.sample_near(center, delta, count, seed)
