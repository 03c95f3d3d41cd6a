"""Exact and sampled cones: normal cones of structured sets, cone arithmetic.

Cone values come in four representations.  Subspace, ConvexCone and RayUnion
are exact; SampledCone is always an inner approximation (a finite bundle of
rays known to lie in the true cone) and every consumer must treat it as a
subset, never as the whole cone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize

from .sets import (
    MEMBERSHIP_TOL,
    AffineSubspace,
    Ball,
    BallSlice,
    ConvexPolyhedron,
    HalfSpace,
    ImplicitManifold,
    SetSpec,
    Sphere,
    UnionOfSets,
    inverse_projector_contains,
    make_rng,
)

__all__ = [
    "Subspace",
    "ConvexCone",
    "RayUnion",
    "SampledCone",
    "NormalSample",
    "cone_distance",
    "cone_contains",
    "cone_negate",
    "cone_is_trivial",
    "unit_directions",
    "pair_extreme_cos",
    "min_sum_sq_dist",
    "cones_intersect_trivially",
    "minkowski_contains",
    "cone_equal",
    "proximal_normal_cone",
    "frechet_normal_cone",
    "limiting_normal_cone",
    "restricted_normal_cone",
    "tangent_space",
    "normal_space",
    "friedrichs_cosine",
    "orthonormal_rows",
    "subspace_intersection",
    "orthogonal_complement",
]

_RANK_TOL = 1e-10  # singular values below this count as intersection directions


def orthonormal_rows(M: np.ndarray, tol: float = _RANK_TOL) -> np.ndarray:
    """Orthonormal basis (rows) of the row space of M."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0 or not np.any(np.abs(M) > tol):
        return np.zeros((0, M.shape[1]))
    _, s, Vt = np.linalg.svd(M, full_matrices=False)
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return Vt[:rank]


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _unit_rows(M: np.ndarray, drop_tol: float = 1e-12) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] == 0:
        return M
    norms = np.linalg.norm(M, axis=1)
    keep = norms > drop_tol
    return M[keep] / norms[keep, None]


def _dedupe_rays(rays: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    kept: list = []
    for r in rays:
        if all(np.linalg.norm(r - k) > tol for k in kept):
            kept.append(r)
    return np.array(kept) if kept else np.zeros((0, rays.shape[1] if rays.ndim == 2 else 0))


# ---------------------------------------------------------------------------
# Cone representations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Subspace:
    """Linear subspace span(rows of basis); basis orthonormal, possibly empty."""

    basis: np.ndarray

    def __post_init__(self):
        basis = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if basis.size == 0:
            basis = basis.reshape(0, basis.shape[1] if basis.ndim == 2 and basis.shape[1] else 0)
        object.__setattr__(self, "basis", basis)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def ambient(self) -> int:
        return self.basis.shape[1]

    def project(self, v: np.ndarray) -> np.ndarray:
        if self.dim == 0:
            return np.zeros_like(v)
        return (v @ self.basis.T) @ self.basis


@dataclass(frozen=True)
class ConvexCone:
    """Finitely generated convex cone {sum lambda_i g_i : lambda >= 0}."""

    generators: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "generators", _unit_rows(self.generators))


@dataclass(frozen=True)
class RayUnion:
    """Union of the listed rays only (not their convex hull)."""

    rays: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rays", _dedupe_rays(_unit_rows(self.rays)))


@dataclass(frozen=True)
class SampledCone:
    """Finite ray bundle known to lie inside the true cone (inner approximation)."""

    rays: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rays", _dedupe_rays(_unit_rows(self.rays)))


Cone = Subspace | ConvexCone | RayUnion | SampledCone


@dataclass(frozen=True)
class NormalSample:
    """One certified normal direction at a base point of a set."""

    base: np.ndarray
    direction: np.ndarray
    kind: str  # proximal | frechet | limiting
    restricted_to: str | None = None


def cone_is_trivial(cone: Cone) -> bool:
    if isinstance(cone, Subspace):
        return cone.dim == 0
    rays = cone.generators if isinstance(cone, ConvexCone) else cone.rays
    return rays.shape[0] == 0


def cone_negate(cone: Cone) -> Cone:
    if isinstance(cone, Subspace):
        return cone
    if isinstance(cone, ConvexCone):
        return ConvexCone(-cone.generators)
    if isinstance(cone, RayUnion):
        return RayUnion(-cone.rays)
    return SampledCone(-cone.rays)


def _ray_distance(rays: np.ndarray, v: np.ndarray) -> float:
    if rays.shape[0] == 0:
        return float(np.linalg.norm(v))
    t = np.maximum(rays @ v, 0.0)
    res = v[None, :] - t[:, None] * rays
    return float(np.min(np.linalg.norm(res, axis=1)))


def cone_distance(cone: Cone, v) -> float:
    """Euclidean distance from v to the cone.

    Exact for Subspace, ConvexCone and RayUnion; for SampledCone it is the
    distance to the sampled rays, an upper bound of the true distance.
    """
    v = np.asarray(v, dtype=float)
    if isinstance(cone, Subspace):
        return float(np.linalg.norm(v - cone.project(v)))
    if isinstance(cone, ConvexCone):
        if cone.generators.shape[0] == 0:
            return float(np.linalg.norm(v))
        sol, res = scipy.optimize.nnls(cone.generators.T, v)
        return float(res)
    return _ray_distance(cone.rays, v)


def cone_contains(cone: Cone, v, tol: float = 1e-9) -> bool:
    v = np.asarray(v, dtype=float)
    return cone_distance(cone, v) <= tol * max(1.0, float(np.linalg.norm(v)))


def unit_directions(cone: Cone, budget: int = 128, seed: int = 0):
    """Representative unit vectors of the cone.

    Returns (directions, complete): complete means the list is exactly the
    set of unit vectors of the cone, so extrema over it are exact.
    """
    if isinstance(cone, Subspace):
        if cone.dim == 0:
            return np.zeros((0, cone.ambient)), True
        if cone.dim == 1:
            b = cone.basis[0]
            return np.stack([b, -b]), True
        rng = make_rng(seed)
        coef = rng.normal(size=(budget, cone.dim))
        dirs = _unit_rows(coef @ cone.basis)
        dirs = np.concatenate([cone.basis, -cone.basis, dirs], axis=0)
        return dirs, False
    if isinstance(cone, ConvexCone):
        g = cone.generators
        if g.shape[0] <= 1:
            return g, True
        rng = make_rng(seed)
        coef = rng.random(size=(budget, g.shape[0]))
        dirs = _unit_rows(np.concatenate([g, coef @ g], axis=0))
        return dirs, False
    complete = isinstance(cone, RayUnion)
    return cone.rays, complete


# ---------------------------------------------------------------------------
# Subspace arithmetic and the Friedrichs angle
# ---------------------------------------------------------------------------

def subspace_intersection(v1: Subspace, v2: Subspace) -> Subspace:
    if v1.dim == 0 or v2.dim == 0:
        return Subspace(np.zeros((0, v1.ambient)))
    stacked = np.hstack([v1.basis.T, -v2.basis.T])
    null = scipy.linalg.null_space(stacked, rcond=_RANK_TOL)
    if null.size == 0:
        return Subspace(np.zeros((0, v1.ambient)))
    vecs = (v1.basis.T @ null[: v1.dim]).T
    return Subspace(orthonormal_rows(vecs))


def orthogonal_complement(v: Subspace) -> Subspace:
    n = v.ambient
    if v.dim == 0:
        return Subspace(np.eye(n))
    return Subspace(scipy.linalg.null_space(v.basis, rcond=_RANK_TOL).T)


def _deflate(v: Subspace, w: Subspace) -> Subspace:
    if w.dim == 0:
        return v
    reduced = v.basis - (v.basis @ w.basis.T) @ w.basis
    return Subspace(orthonormal_rows(reduced))


def friedrichs_cosine(v1: Subspace, v2: Subspace) -> float:
    """Cosine of the Friedrichs angle: principal angle after deflating V1 cap V2.

    Returns 0 when either deflated subspace is trivial (maximum over an
    empty index set).
    """
    if v1.ambient != v2.ambient:
        raise ValueError("subspaces live in different ambient dimensions")
    w = subspace_intersection(v1, v2)
    d1 = _deflate(v1, w)
    d2 = _deflate(v2, w)
    if d1.dim == 0 or d2.dim == 0:
        return 0.0
    s = np.linalg.svd(d1.basis @ d2.basis.T, compute_uv=False)
    return float(np.clip(s[0], 0.0, 1.0))


# ---------------------------------------------------------------------------
# Extremal pairings between two cones
# ---------------------------------------------------------------------------

def pair_extreme_cos(c1: Cone, c2: Cone, budget: int = 2048, seed: int = 0):
    """(min, max, exact) of <u1, u2> over unit vectors of the two cones.

    Exact for subspace/subspace, subspace/finite-ray and finite/finite pairs;
    sampled otherwise.  Returns None when either cone is trivial.
    """
    if cone_is_trivial(c1) or cone_is_trivial(c2):
        return None
    if isinstance(c1, Subspace) and isinstance(c2, Subspace):
        s = np.linalg.svd(c1.basis @ c2.basis.T, compute_uv=False)
        top = float(np.clip(s[0], 0.0, 1.0))
        return -top, top, True
    if isinstance(c2, Subspace):
        c1, c2 = c2, c1
    if isinstance(c1, Subspace):
        dirs, complete = unit_directions(c2, budget, seed)
        reach = np.linalg.norm(dirs @ c1.basis.T, axis=1)  # |P_V u| per ray
        top = float(np.clip(np.max(reach), 0.0, 1.0))
        return -top, top, complete
    d1, comp1 = unit_directions(c1, budget, seed)
    d2, comp2 = unit_directions(c2, budget, seed + 1)
    dots = d1 @ d2.T
    return float(np.min(dots)), float(np.max(dots)), comp1 and comp2


def _refine_on_sphere(f, v0: np.ndarray) -> tuple[float, np.ndarray]:
    def wrapped(w):
        nw = np.linalg.norm(w)
        if nw < 1e-12:
            return 1e9
        return f(w / nw)

    res = scipy.optimize.minimize(wrapped, v0, method="Nelder-Mead",
                                  options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 2000})
    v = res.x / np.linalg.norm(res.x)
    return float(f(v)), v


def min_sum_sq_dist(c1: Cone, c2: Cone, budget: int = 4096, seed: int = 0):
    """(value, exact): min over unit v of d^2(v, c1) + d^2(v, c2).

    Exact eigenvalue path for subspace pairs; sampled unit directions with
    local refinement otherwise.
    """
    if isinstance(c1, Subspace) and isinstance(c2, Subspace):
        n = c1.ambient
        p1 = c1.basis.T @ c1.basis if c1.dim else np.zeros((n, n))
        p2 = c2.basis.T @ c2.basis if c2.dim else np.zeros((n, n))
        vals = np.linalg.eigvalsh(2 * np.eye(n) - p1 - p2)
        return float(max(vals[0], 0.0)), True

    def f(v):
        return cone_distance(c1, v) ** 2 + cone_distance(c2, v) ** 2

    n = c1.ambient if isinstance(c1, Subspace) else (
        c1.generators.shape[1] if isinstance(c1, ConvexCone) else c1.rays.shape[1])
    rng = make_rng(seed)
    cand = rng.normal(size=(budget, n))
    cand = cand / np.linalg.norm(cand, axis=1, keepdims=True)
    extra = []
    for cone in (c1, c2):
        dirs, _ = unit_directions(cone, 64, seed)
        if dirs.shape[0]:
            extra.append(dirs)
    if extra:
        cand = np.concatenate([cand] + extra, axis=0)
    vals = np.array([f(v) for v in cand])
    order = np.argsort(vals)
    best = vals[order[0]]
    for idx in order[:5]:
        val, _ = _refine_on_sphere(f, cand[idx])
        best = min(best, val)
    return float(max(best, 0.0)), False


def cones_intersect_trivially(c1: Cone, c2: Cone, tol: float = 1e-9):
    """(trivial, certified): whether c1 cap c2 = {0}.

    Sampled representations can certify a NONtrivial intersection only; for
    them a trivial answer is not certified.
    """
    if cone_is_trivial(c1) or cone_is_trivial(c2):
        return True, True
    if isinstance(c1, Subspace) and isinstance(c2, Subspace):
        s = np.linalg.svd(c1.basis @ c2.basis.T, compute_uv=False)
        return bool(s[0] < 1 - 1e-9), True
    # Ray-like against anything: test each listed ray for membership.
    for a, b in ((c1, c2), (c2, c1)):
        if isinstance(a, (RayUnion, SampledCone)):
            hit = any(cone_distance(b, r) <= tol for r in a.rays)
            if hit:
                return False, True
            certified = isinstance(a, RayUnion) and not isinstance(b, (SampledCone, ConvexCone))
            if isinstance(a, RayUnion) and isinstance(b, (Subspace, RayUnion)):
                return True, True
            if not hit and isinstance(a, RayUnion) and isinstance(b, ConvexCone):
                # rays all outside a convex cone: exact (membership test exact)
                return True, True
            return True, certified
    # Convex cone against subspace or convex cone: LP probes, numeric fallback.
    if _convex_pair_nontrivial(c1, c2, tol):
        return False, True
    val, exact = min_sum_sq_dist(c1, c2, budget=2048)
    if val <= 1e-12:
        return False, True
    return True, exact


def _convex_pair_nontrivial(c1: Cone, c2: Cone, tol: float) -> bool:
    """LP probe for a nonzero common direction of two convex cones."""
    n = c1.basis.shape[1] if isinstance(c1, Subspace) else c1.generators.shape[1]

    def gen_matrix(c):
        if isinstance(c, Subspace):
            return np.concatenate([c.basis, -c.basis], axis=0)
        return c.generators

    g1 = gen_matrix(c1)
    g2 = gen_matrix(c2)
    if g1.shape[0] == 0 or g2.shape[0] == 0:
        return False
    m1, m2 = g1.shape[0], g2.shape[0]
    a_eq = np.hstack([g1.T, -g2.T])  # v = G1' lam = G2' mu
    bounds = [(0, 1)] * (m1 + m2)
    for c_dir in list(np.eye(n)) + list(-np.eye(n)):
        obj = np.concatenate([-(g1 @ c_dir), np.zeros(m2)])
        res = scipy.optimize.linprog(obj, A_eq=a_eq, b_eq=np.zeros(n), bounds=bounds,
                                     method="highs")
        if res.status == 0 and -res.fun > 10 * tol:
            return True
    return False


def minkowski_contains(c1: Cone, c2: Cone, v, tol: float = 1e-8) -> bool:
    """Membership of v in the Minkowski sum c1 + c2 (exact for structured cones)."""
    v = np.asarray(v, dtype=float)
    n = v.shape[0]

    def branches(c):
        if isinstance(c, Subspace):
            return [(c.basis, np.zeros((0, n)))]
        if isinstance(c, ConvexCone):
            return [(np.zeros((0, n)), c.generators)]
        return [(np.zeros((0, n)), r[None, :]) for r in c.rays]

    for f1, g1 in branches(c1):
        for f2, g2 in branches(c2):
            free = np.concatenate([f1, f2], axis=0)
            gens = np.concatenate([g1, g2], axis=0)
            if free.shape[0] == 0 and gens.shape[0] == 0:
                if np.linalg.norm(v) <= tol:
                    return True
                continue
            a_eq = np.hstack([free.T, gens.T]) if free.shape[0] or gens.shape[0] else None
            nfree, ngen = free.shape[0], gens.shape[0]
            bounds = [(None, None)] * nfree + [(0, None)] * ngen
            res = scipy.optimize.linprog(np.zeros(nfree + ngen), A_eq=a_eq, b_eq=v,
                                         bounds=bounds, method="highs")
            if res.status == 0 and np.linalg.norm(a_eq @ res.x - v) <= tol * max(1, np.linalg.norm(v)):
                return True
    return False


def cone_subset(c1: Cone, c2: Cone, tol: float = 1e-9):
    """(c1 subset of c2, certified).

    Generator membership certifies containment when c1 is generated by the
    tested directions and c2 is convex (or both are plain ray bundles).
    """
    if cone_is_trivial(c1):
        return True, True
    if cone_is_trivial(c2):
        return False, True
    if isinstance(c1, Subspace):
        dirs = np.concatenate([c1.basis, -c1.basis])
        spanning = c1.dim
    elif isinstance(c1, ConvexCone):
        dirs = c1.generators
        spanning = 1 if dirs.shape[0] <= 1 else 2
    else:
        dirs = c1.rays
        spanning = 1
    holds = all(cone_distance(c2, u) <= tol for u in dirs)
    if isinstance(c2, (Subspace, ConvexCone)):
        certified = not isinstance(c1, SampledCone) or not holds
    else:
        # c2 is a ray bundle: only individual rays can be certified inside it.
        certified = spanning <= 1 and not isinstance(c1, SampledCone)
        if isinstance(c1, SampledCone):
            certified = not holds  # a violation is a certificate
    return holds, certified


def cone_equal(c1: Cone, c2: Cone, tol: float = 1e-9):
    """(equal, certified) by mutual containment."""
    t1, t2 = cone_is_trivial(c1), cone_is_trivial(c2)
    if t1 or t2:
        return t1 and t2, True
    if isinstance(c1, Subspace) and isinstance(c2, Subspace):
        if c1.dim != c2.dim:
            return False, True
        s = np.linalg.svd(c1.basis @ c2.basis.T, compute_uv=False)
        return bool(np.all(s > 1 - 1e-9)), True
    fwd, cert_f = cone_subset(c1, c2, tol)
    bwd, cert_b = cone_subset(c2, c1, tol)
    return fwd and bwd, cert_f and cert_b


# ---------------------------------------------------------------------------
# Normal cones of structured sets
# ---------------------------------------------------------------------------

def _require_member(spec: SetSpec, a: np.ndarray):
    if not spec.contains(a, 100 * MEMBERSHIP_TOL):
        raise ValueError("base point does not belong to the set")


def proximal_normal_cone(spec: SetSpec, a) -> Cone:
    """cone(P^{-1}(a) - a): exact for the structured variants."""
    a = np.asarray(a, dtype=float)
    _require_member(spec, a)
    n = spec.dim
    if isinstance(spec, AffineSubspace):
        return orthogonal_complement(Subspace(spec.basis if spec.basis.shape[0] else np.zeros((0, n))))
    if isinstance(spec, HalfSpace):
        if abs(float(spec.normal @ a) - spec.offset) <= 1e-9 * (1 + abs(spec.offset)):
            return ConvexCone(spec.normal[None, :])
        return ConvexCone(np.zeros((0, n)))
    if isinstance(spec, Ball):
        r = np.linalg.norm(a - spec.center)
        if abs(r - spec.radius) <= 1e-9 * (1 + spec.radius):
            return ConvexCone(((a - spec.center) / r)[None, :])
        return ConvexCone(np.zeros((0, n)))
    if isinstance(spec, Sphere):
        radial = _unit(a - spec.center)
        return Subspace(radial[None, :])
    if isinstance(spec, ConvexPolyhedron):
        act = spec.active_constraints(a)
        return ConvexCone(spec.normals[act])
    if isinstance(spec, BallSlice):
        gens = [spec.normals[i] for i in spec.active_halfspaces(a)]
        if spec.ball_active(a):
            gens.append(a - spec.center)
        return ConvexCone(np.array(gens) if gens else np.zeros((0, n)))
    if isinstance(spec, ImplicitManifold):
        # Built-in manifolds are smooth, where the proximal cone is the normal space.
        return Subspace(spec.normal_basis(a))
    if isinstance(spec, UnionOfSets):
        return _union_proximal_cone(spec, a)
    raise TypeError(f"no proximal normal cone rule for {type(spec).__name__}")


def _union_proximal_cone(spec: UnionOfSets, a: np.ndarray) -> Cone:
    branches = spec.branches_at(a)
    others = [m for i, m in enumerate(spec.members) if i not in branches]
    clearance = min((m.distance(a) for m in others), default=np.inf)
    if len(branches) == 1 and clearance > 1e-6:
        # Other branches stay clear locally; the branch cone is the union cone.
        return proximal_normal_cone(spec.members[branches[0]], a)
    # Multi-branch point: certify candidate rays by the inverse-projector test.
    candidates = []
    for i in branches:
        cone = proximal_normal_cone(spec.members[i], a)
        dirs, _ = unit_directions(cone, budget=32, seed=7)
        candidates.extend(dirs)
    scale = min(1.0, clearance if np.isfinite(clearance) else 1.0)
    kept = []
    for u in _dedupe_rays(np.array(candidates)) if candidates else []:
        t = 1e-7 * scale
        if inverse_projector_contains(spec, a, a + t * u):
            kept.append(u)
    return RayUnion(np.array(kept)) if kept else RayUnion(np.zeros((0, spec.dim)))


def frechet_normal_cone(spec: SetSpec, a) -> Cone:
    a = np.asarray(a, dtype=float)
    _require_member(spec, a)
    if isinstance(spec, (AffineSubspace, HalfSpace, Ball, ConvexPolyhedron, BallSlice)):
        return proximal_normal_cone(spec, a)  # convex: all cones coincide
    if isinstance(spec, (Sphere, ImplicitManifold)):
        return _manifold_normal_space(spec, a)
    if isinstance(spec, UnionOfSets):
        branches = spec.branches_at(a)
        others = [m for i, m in enumerate(spec.members) if i not in branches]
        clearance = min((m.distance(a) for m in others), default=np.inf)
        if len(branches) == 1 and clearance > 1e-6:
            return frechet_normal_cone(spec.members[branches[0]], a)
        cones = [frechet_normal_cone(spec.members[i], a) for i in branches]
        out = cones[0]
        for c in cones[1:]:
            out = _cone_intersect(out, c)
        return out
    raise TypeError(f"no Frechet normal cone rule for {type(spec).__name__}")


def limiting_normal_cone(spec: SetSpec, a, delta_sample: float = 0.1,
                         budget: int = 64, seed: int = 0) -> Cone:
    a = np.asarray(a, dtype=float)
    _require_member(spec, a)
    if isinstance(spec, (AffineSubspace, HalfSpace, Ball, ConvexPolyhedron, BallSlice)):
        return proximal_normal_cone(spec, a)
    if isinstance(spec, (Sphere, ImplicitManifold)):
        return _manifold_normal_space(spec, a)
    if isinstance(spec, UnionOfSets):
        branches = spec.branches_at(a)
        others = [m for i, m in enumerate(spec.members) if i not in branches]
        clearance = min((m.distance(a) for m in others), default=np.inf)
        if len(branches) == 1 and clearance > 1e-6:
            return limiting_normal_cone(spec.members[branches[0]], a, delta_sample, budget, seed)
        rays = []
        exact = True
        for i in branches:
            cone = limiting_normal_cone(spec.members[i], a, delta_sample, budget, seed)
            dirs, complete = unit_directions(cone, budget=budget, seed=seed)
            rays.extend(dirs)
            exact = exact and complete
        rays = np.array(rays) if rays else np.zeros((0, spec.dim))
        return RayUnion(rays) if exact else SampledCone(rays)
    # Generic fallback: outer limit approximated from below by proximal cones
    # at nearby sampled base points (inner approximation, flagged Sampled).
    pts = spec.sample_near(a, delta_sample, budget, seed)
    rays = []
    for x in np.concatenate([a[None, :], pts], axis=0):
        dirs, _ = unit_directions(proximal_normal_cone(spec, x), budget=16, seed=seed)
        rays.extend(dirs)
    return SampledCone(np.array(rays) if rays else np.zeros((0, spec.dim)))


def _manifold_normal_space(spec, a) -> Subspace:
    if isinstance(spec, Sphere):
        return Subspace(_unit(np.asarray(a, float) - spec.center)[None, :])
    return Subspace(spec.normal_basis(a))


def _cone_intersect(c1: Cone, c2: Cone) -> Cone:
    """Intersection for the cases arising at union branch points."""
    if isinstance(c1, Subspace) and isinstance(c2, Subspace):
        return subspace_intersection(c1, c2)
    if cone_is_trivial(c1) or cone_is_trivial(c2):
        n = c1.basis.shape[1] if isinstance(c1, Subspace) else (
            c1.generators.shape[1] if isinstance(c1, ConvexCone) else c1.rays.shape[1])
        return ConvexCone(np.zeros((0, n)))
    d1, comp1 = unit_directions(c1)
    d2, comp2 = unit_directions(c2)
    kept = [u for u in d1 if cone_contains(c2, u)]
    kept += [u for u in d2 if cone_contains(c1, u) and all(np.linalg.norm(u - k) > 1e-9 for k in kept)]
    n = d1.shape[1]
    rays = np.array(kept) if kept else np.zeros((0, n))
    if comp1 and comp2:
        return RayUnion(rays)
    convex = isinstance(c1, (Subspace, ConvexCone)) and isinstance(c2, (Subspace, ConvexCone))
    single_gen = all(
        (isinstance(c, ConvexCone) and c.generators.shape[0] <= 1) or
        (isinstance(c, Subspace) and c.dim <= 1) for c in (c1, c2))
    if convex and single_gen:
        return ConvexCone(rays)
    return SampledCone(rays)


# ---------------------------------------------------------------------------
# Restricted normal cones
# ---------------------------------------------------------------------------

def restricted_normal_cone(spec: SetSpec, restriction: SetSpec | None, a,
                           kind: str = "proximal", delta_sample: float = 0.5,
                           budget: int = 2048, seed: int = 0) -> Cone:
    """Normal cone of `spec` at `a`, built only from directions meeting `restriction`.

    restriction=None means the whole space, recovering the unrestricted cones.
    The proximal kind collects cone(x - a) over sampled x in the restriction
    whose projection onto the set contains a; it may legitimately be trivial.
    """
    a = np.asarray(a, dtype=float)
    _require_member(spec, a)
    if restriction is None:
        if kind == "proximal":
            return proximal_normal_cone(spec, a)
        if kind == "frechet":
            return frechet_normal_cone(spec, a)
        return limiting_normal_cone(spec, a, delta_sample, min(budget, 128), seed)
    if kind == "proximal":
        return _restricted_proximal(spec, restriction, a, delta_sample, budget, seed)
    if kind == "frechet":
        base = frechet_normal_cone(spec, a)
        into = restriction.sample_near(a, delta_sample, budget, seed)
        dirs = _unit_rows(into - a)
        if dirs.shape[0] == 0:
            return SampledCone(np.zeros((0, spec.dim)))
        reach = SampledCone(dirs)
        base_dirs, _ = unit_directions(base, budget=128, seed=seed)
        kept = [u for u in base_dirs if cone_distance(reach, u) <= 1e-6]
        return SampledCone(np.array(kept) if kept else np.zeros((0, spec.dim)))
    if kind == "limiting":
        bases = spec.sample_near(a, delta_sample, max(budget // 32, 8), seed + 13)
        rays = []
        per = max(budget // max(len(bases) + 1, 1), 64)
        for x in np.concatenate([a[None, :], bases], axis=0):
            sub = _restricted_proximal(spec, restriction, x, delta_sample, per, seed + 29)
            dirs, _ = unit_directions(sub, budget=16, seed=seed)
            rays.extend(dirs)
        return SampledCone(np.array(rays) if rays else np.zeros((0, spec.dim)))
    raise ValueError(f"unknown cone kind {kind!r}")


def _solve_preimage_in_restriction(spec, restriction, a, x0, iters: int = 40):
    """Drive x within the restriction toward {x : a in P_spec(x)} by the
    fixed-point step x <- P_R(x - (P_spec(x) - a)); returns x or None."""
    x = x0.copy()
    for _ in range(iters):
        res = spec.project(x)
        p = min(res.points, key=lambda q: np.linalg.norm(q - a))
        gap = p - a
        if np.linalg.norm(gap) <= 1e-13:
            break
        nxt = restriction.project(x - gap)
        x_new = min(nxt.points, key=lambda q: np.linalg.norm(q - x))
        if np.linalg.norm(x_new - x) <= 1e-15:
            x = x_new
            break
        x = x_new
    try:
        if inverse_projector_contains(spec, a, x):
            return x
    except ValueError:
        return None
    return None


def _restricted_proximal(spec, restriction, a, delta_sample, budget, seed) -> Cone:
    pts = restriction.sample_near(a, delta_sample, budget, seed)
    rays = []
    polish_budget = min(len(pts), max(budget // 16, 12))
    for i, x0 in enumerate(pts):
        d = np.linalg.norm(x0 - a)
        if d <= 1e-12:
            continue
        if inverse_projector_contains(spec, a, x0):
            rays.append((x0 - a) / d)
        elif i < polish_budget:
            x = _solve_preimage_in_restriction(spec, restriction, a, x0)
            if x is not None and np.linalg.norm(x - a) > 1e-10:
                rays.append(_unit(x - a))
    # Exact cone rays whose short segments stay inside the restriction.
    exact_dirs, _ = unit_directions(proximal_normal_cone(spec, a), budget=32, seed=seed)
    for u in exact_dirs:
        for t in (1e-3 * delta_sample, 1e-5 * delta_sample):
            x = a + t * u
            if restriction.contains(x, 1e-9) and inverse_projector_contains(spec, a, x):
                rays.append(u)
                break
    rays = _dedupe_rays(np.array(rays), tol=1e-6) if rays else np.zeros((0, spec.dim))
    return SampledCone(rays)


# ---------------------------------------------------------------------------
# Tangent and normal spaces of manifold-like sets
# ---------------------------------------------------------------------------

def tangent_space(spec: SetSpec, x) -> Subspace:
    x = np.asarray(x, dtype=float)
    if isinstance(spec, ImplicitManifold):
        return Subspace(spec.tangent_basis(x))
    if isinstance(spec, AffineSubspace):
        return Subspace(spec.basis)
    if isinstance(spec, Sphere):
        return orthogonal_complement(_manifold_normal_space(spec, x))
    raise TypeError(f"{type(spec).__name__} has no tangent space")


def normal_space(spec: SetSpec, x) -> Subspace:
    return orthogonal_complement(tangent_space(spec, x))
