"""Subtransversality and transversality constants of a pair of closed sets.

Every constant is estimated along at least two routes (metric sampling and a
dual cone computation) and the routes are cross-validated by an implication
audit.  A PairScenario requires an exact description of the intersection:
the distance d(x, A cap B) divides every metric ratio and is never itself
estimated by sampling.

Saturation semantics: scenarios whose reference point lies in the interior
of both sets report sr = r = infinity as a flag, never as a float.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize

from .cones import (
    Cone,
    ConvexCone,
    RayUnion,
    SampledCone,
    Subspace,
    cone_distance,
    cone_is_trivial,
    cone_negate,
    cones_intersect_trivially,
    frechet_normal_cone,
    friedrichs_cosine,
    limiting_normal_cone,
    min_sum_sq_dist,
    minkowski_contains,
    orthogonal_complement,
    orthonormal_rows,
    pair_extreme_cos,
    proximal_normal_cone,
    restricted_normal_cone,
    tangent_space,
    unit_directions,
)
from .estimates import CheckResult, Estimate
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
    make_rng,
    uniform_ball,
)

__all__ = [
    "PairScenario",
    "ConstantsReport",
    "primal_subtransversality_check",
    "sr_metric_estimate",
    "srr_estimate",
    "r_metric_estimate",
    "r_dual_estimate",
    "dual_siblings",
    "DualConstants",
    "transversality_condition_check",
    "manifold_transversality_check",
    "intrinsic_transversality_estimate",
    "separable_intersection_check",
    "holder_pairing_check",
    "ab_qualification_check",
    "inherent_transversality_check",
    "dual_subtransversality_sufficient_check",
    "svm_view",
    "SvmReport",
    "chip_inclusion_check",
    "analyze_pair",
    "implication_audit",
    "intersect_specs",
]

_EXCL_TOL = 1e-11  # distances below this count as membership when carving X \ Y


@dataclass
class PairScenario:
    """Two closed sets with a common point and an exact intersection description."""

    name: str
    set_a: SetSpec
    set_b: SetSpec
    xbar: np.ndarray
    intersection: SetSpec
    delta: float = 0.5
    budget: int = 2048
    seed: int = 7

    def __post_init__(self):
        self.xbar = np.asarray(self.xbar, dtype=float)
        if self.delta <= 0:
            raise ValueError("scenario radius delta must be positive")
        dims = {self.set_a.dim, self.set_b.dim, self.intersection.dim, self.xbar.shape[0]}
        if len(dims) != 1:
            raise ValueError("dimension mismatch among scenario objects")
        for label, spec in (("A", self.set_a), ("B", self.set_b), ("intersection", self.intersection)):
            if not spec.contains(self.xbar, 1e-7):
                raise ValueError(f"xbar does not belong to {label}")
        # the intersection spec must lie in both sets (checked on samples)
        probe = self.intersection.sample_near(self.xbar, self.delta, 32, self.seed)
        for p in probe:
            if self.set_a.distance(p) > 1e-7 or self.set_b.distance(p) > 1e-7:
                raise ValueError("intersection spec escapes A or B")

    @property
    def dim(self) -> int:
        return self.xbar.shape[0]


# ---------------------------------------------------------------------------
# Exact translated intersections
# ---------------------------------------------------------------------------

def _as_polyhedron(spec: SetSpec) -> ConvexPolyhedron | None:
    if isinstance(spec, ConvexPolyhedron):
        return spec
    if isinstance(spec, HalfSpace):
        return ConvexPolyhedron(spec.normal[None, :], np.array([spec.offset]))
    if isinstance(spec, AffineSubspace):
        comp = orthonormal_rows(scipy_nullspace_rows(spec.basis, spec.offset.shape[0]))
        if comp.shape[0] == 0:
            return None  # whole space; caller handles
        offs = comp @ spec.offset
        normals = np.concatenate([comp, -comp], axis=0)
        return ConvexPolyhedron(normals, np.concatenate([offs, -offs]))
    return None


def scipy_nullspace_rows(basis: np.ndarray, n: int) -> np.ndarray:
    if basis.shape[0] == 0:
        return np.eye(n)
    return scipy.linalg.null_space(basis, rcond=1e-10).T


def _affine_intersection(a1: AffineSubspace, a2: AffineSubspace):
    n = a1.dim
    rows = []
    rhs = []
    for aff in (a1, a2):
        comp = scipy_nullspace_rows(aff.basis, n)
        if comp.shape[0]:
            rows.append(comp)
            rhs.append(comp @ aff.offset)
    if not rows:
        return AffineSubspace(np.eye(n), np.zeros(n)), True
    M = np.concatenate(rows, axis=0)
    b = np.concatenate(rhs)
    sol, *_ = np.linalg.lstsq(M, b, rcond=None)
    if np.linalg.norm(M @ sol - b) > 1e-9 * (1 + np.linalg.norm(b)):
        return None, True  # certified empty
    null = scipy.linalg.null_space(M, rcond=1e-10)
    return AffineSubspace(null.T, sol), True


def intersect_specs(s1: SetSpec, s2: SetSpec):
    """(spec|None, certified): exact intersection where a structured form exists.

    None means empty; certified=False means "could not decide/construct".
    """
    if isinstance(s1, UnionOfSets):
        members = []
        certified = True
        for m in s1.members:
            spec, cert = intersect_specs(m, s2)
            certified &= cert
            if spec is not None:
                members.append(spec)
        if not certified:
            return None, False
        if not members:
            return None, True
        return (members[0] if len(members) == 1 else UnionOfSets(tuple(members))), True
    if isinstance(s2, UnionOfSets):
        return intersect_specs(s2, s1)
    if isinstance(s1, AffineSubspace) and isinstance(s2, AffineSubspace):
        return _affine_intersection(s1, s2)
    p1, p2 = _as_polyhedron(s1), _as_polyhedron(s2)
    if p1 is not None and p2 is not None:
        merged = ConvexPolyhedron(np.concatenate([p1.normals, p2.normals]),
                                  np.concatenate([p1.offsets, p2.offsets]))
        res = scipy.optimize.linprog(np.zeros(merged.dim), A_ub=merged.normals,
                                     b_ub=merged.offsets, bounds=[(None, None)] * merged.dim,
                                     method="highs")
        if res.status == 2:
            return None, True
        return merged, True
    ball1 = s1 if isinstance(s1, (Ball, BallSlice)) else None
    ball2 = s2 if isinstance(s2, (Ball, BallSlice)) else None
    if ball1 is not None and p2 is not None:
        return _ball_poly_merge(ball1, p2), True
    if ball2 is not None and p1 is not None:
        return _ball_poly_merge(ball2, p1), True
    if ball1 is not None and ball2 is not None:
        c1, r1 = ball1.center, ball1.radius
        c2, r2 = ball2.center, ball2.radius
        if np.linalg.norm(c1 - c2) <= 1e-12 and abs(r1 - r2) <= 1e-12:
            h1 = _slice_halfspaces(ball1)
            h2 = _slice_halfspaces(ball2)
            merged = BallSlice(c1, r1, np.concatenate([h1[0], h2[0]]),
                               np.concatenate([h1[1], h2[1]]))
            if merged.normals.shape[0]:
                poly = ConvexPolyhedron(merged.normals, merged.offsets)
                merged = _ball_poly_merge(Ball(c1, r1), poly)
            return merged, True
        if np.linalg.norm(c1 - c2) > r1 + r2 + 1e-12:
            return None, True  # certified disjoint
        return None, False
    if isinstance(s1, Sphere) and isinstance(s2, AffineSubspace):
        return _sphere_affine_intersection(s1, s2)
    if isinstance(s2, Sphere) and isinstance(s1, AffineSubspace):
        return _sphere_affine_intersection(s2, s1)
    return None, False


def _slice_halfspaces(spec):
    if isinstance(spec, BallSlice) and spec.normals.shape[0]:
        return spec.normals, spec.offsets
    return np.zeros((0, spec.dim)), np.zeros(0)


def _ball_poly_merge(ball, poly: ConvexPolyhedron):
    h = _slice_halfspaces(ball)
    merged = BallSlice(ball.center, ball.radius,
                       np.concatenate([h[0], poly.normals]),
                       np.concatenate([h[1], poly.offsets]))
    # Certify nonemptiness: the polyhedral part must come within the radius.
    if merged.normals.shape[0]:
        from .sets import ProjectionError

        try:
            gap = ConvexPolyhedron(merged.normals, merged.offsets).distance(ball.center)
        except ProjectionError:
            return None
        if gap > ball.radius + 1e-12:
            return None
    return merged


def _sphere_affine_intersection(sph: Sphere, aff: AffineSubspace):
    pl = aff.project(sph.center).closest()
    gap_sq = sph.radius**2 - float(np.linalg.norm(sph.center - pl)) ** 2
    if gap_sq < -1e-12:
        return None, True
    if aff.basis.shape[0] == 0:
        return (aff if abs(gap_sq) <= 1e-12 else None), True
    if aff.basis.shape[0] == 1:
        d = aff.basis[0]
        if gap_sq <= 1e-12:
            return AffineSubspace(np.zeros((0, aff.dim)), pl), True
        r = np.sqrt(gap_sq)
        p1 = AffineSubspace(np.zeros((0, aff.dim)), pl + r * d)
        p2 = AffineSubspace(np.zeros((0, aff.dim)), pl - r * d)
        return UnionOfSets((p1, p2)), True
    return None, False  # higher-dimensional sphere slices are not represented


class _IterativeIntersection:
    """Dykstra-style fallback for pairs of convex sets without a merged form."""

    def __init__(self, s1: SetSpec, s2: SetSpec):
        self.s1, self.s2 = s1, s2
        self.dim = s1.dim

    def distance(self, x) -> float | None:
        x = np.asarray(x, dtype=float)
        y = x.copy()
        p = np.zeros_like(x)
        q = np.zeros_like(x)
        for _ in range(500):
            u = self.s1.project(y + p).closest()
            p = y + p - u
            v = self.s2.project(u + q).closest()
            q = u + q - v
            if np.linalg.norm(u - v) < 1e-12:
                return float(np.linalg.norm(x - v))
            y = v
        if np.linalg.norm(u - v) < 1e-9:
            return float(np.linalg.norm(x - v))
        return None  # did not converge: treated as not-certified

    def distances(self, X):
        return np.array([d if (d := self.distance(x)) is not None else np.nan for x in X])


# ---------------------------------------------------------------------------
# Metric estimates
# ---------------------------------------------------------------------------

def _sample_pool(s: PairScenario, seed_shift: int = 0) -> np.ndarray:
    """Ambient + in-set sample points inside B_delta(xbar)."""
    rng = make_rng(s.seed + seed_shift)
    parts = [uniform_ball(rng, s.xbar, s.delta, s.budget)]
    quarter = max(s.budget // 4, 32)
    for i, spec in enumerate((s.set_a, s.set_b)):
        pts = spec.sample_near(s.xbar, s.delta, quarter, s.seed + seed_shift + 101 + i)
        if len(pts):
            parts.append(pts)
        small = spec.sample_near(s.xbar, s.delta / 16, quarter // 2, s.seed + seed_shift + 301 + i)
        if len(small):
            parts.append(small)
    return np.concatenate(parts, axis=0)


def sr_metric_estimate(s: PairScenario, seed_shift: int = 0) -> Estimate:
    """Empirical inf of max{d(x,A), d(x,B)} / d(x, A cap B) over the delta-ball."""
    X = _sample_pool(s, seed_shift)
    d_int = s.intersection.distances(X)
    keep = d_int > _EXCL_TOL
    if not np.any(keep):
        return Estimate(None, "upper", len(X), flag="saturated")
    X = X[keep]
    d_int = d_int[keep]
    ratios = np.maximum(s.set_a.distances(X), s.set_b.distances(X)) / d_int
    i = int(np.argmin(ratios))
    return Estimate(float(ratios[i]), "upper", len(X), witness=(tuple(X[i]),))


def srr_estimate(s: PairScenario) -> Estimate:
    """Empirical inf of d(x,B)/d(x, A cap B) over x in A; degenerate when A = B."""
    parts = []
    for scale, count, shift in ((s.delta, s.budget, 11), (s.delta / 16, s.budget // 4, 12)):
        pts = s.set_a.sample_near(s.xbar, scale, count, s.seed + shift)
        if len(pts):
            parts.append(pts)
    if not parts:
        return Estimate(None, "upper", 0, flag="degenerate")
    X = np.concatenate(parts, axis=0)
    d_int = s.intersection.distances(X)
    keep = d_int > _EXCL_TOL
    if not np.any(keep):
        return Estimate(None, "upper", len(X), flag="degenerate")
    ratios = s.set_b.distances(X[keep]) / d_int[keep]
    i = int(np.argmin(ratios))
    return Estimate(float(ratios[i]), "upper", int(np.sum(keep)), witness=(tuple(X[keep][i]),))


def r_metric_estimate(s: PairScenario, n_translations: int = 40, seed_shift: int = 0) -> Estimate:
    """Uniform-over-translations version of the subtransversality ratio.

    Certified-empty translated intersections witness r = 0 exactly; emptiness
    that cannot be certified skips the sample (usable fraction is reported).
    """
    rng = make_rng(s.seed + 4000 + seed_shift)
    shifts = uniform_ball(rng, np.zeros(s.dim), s.delta, 2 * n_translations)
    per = max(s.budget // n_translations, 16)
    best = np.inf
    witness = None
    usable = 0
    skipped = 0
    for k in range(n_translations):
        t1, t2 = shifts[2 * k], shifts[2 * k + 1]
        a2 = s.set_a.translate(-t1)
        b2 = s.set_b.translate(-t2)
        inter, certified = intersect_specs(a2, b2)
        if inter is None:
            if certified:
                return Estimate(0.0, "upper", usable + 1,
                                witness=(tuple(t1), tuple(t2), "empty-intersection"))
            if s.set_a.convex and s.set_b.convex:
                inter = _IterativeIntersection(a2, b2)
            else:
                skipped += 1
                continue
        X = uniform_ball(rng, s.xbar, s.delta, per)
        extra = inter.sample_near(s.xbar, s.delta, per // 2, s.seed + 71 * k) \
            if isinstance(inter, SetSpec) else np.zeros((0, s.dim))
        if len(extra):
            # perturb intersection samples into the ambient to probe small ratios
            X = np.concatenate([X, extra + uniform_ball(rng, np.zeros(s.dim), s.delta / 8, len(extra))])
        d_int = inter.distances(X)
        good = np.isfinite(d_int) & (d_int > _EXCL_TOL)
        if not np.any(good):
            skipped += 1
            continue
        usable += 1
        ratios = np.maximum(a2.distances(X[good]), b2.distances(X[good])) / d_int[good]
        j = int(np.argmin(ratios))
        if ratios[j] < best:
            best = float(ratios[j])
            witness = (tuple(t1), tuple(t2), tuple(X[good][j]))
    if usable == 0:
        return Estimate(None, "upper", 0, flag="no-information")
    flag = None if usable >= (usable + skipped) / 2 else "low-usable-fraction"
    return Estimate(best, "upper", usable, flag=flag, witness=witness)


def primal_subtransversality_check(s: PairScenario, alpha: float,
                                   n_rho: int = 24, seed_shift: int = 0) -> CheckResult:
    """Direct test of the inflation inclusion; the independent primal oracle.

    For rho in (0, delta), points of (A + alpha rho B) cap (B + alpha rho B)
    near xbar must lie within rho of the intersection.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    rng = make_rng(s.seed + 900 + seed_shift)
    rhos = (0.05 + 0.95 * rng.random(n_rho)) * s.delta
    per = max(s.budget // n_rho, 64)
    # Violations concentrate along bisector directions between the two sets,
    # just outside radius rho from the intersection; probe those deliberately.
    pts_a = s.set_a.sample_near(s.xbar, s.delta, 16, s.seed + 18)
    pts_b = s.set_b.sample_near(s.xbar, s.delta, 16, s.seed + 19)
    bisectors = []
    for a in pts_a:
        ua = a - s.xbar
        na = np.linalg.norm(ua)
        if na <= 1e-12:
            continue
        for b in pts_b:
            ub = b - s.xbar
            nb = np.linalg.norm(ub)
            if nb <= 1e-12:
                continue
            for sign in (1.0, -1.0):
                d = ua / na + sign * ub / nb
                nd = np.linalg.norm(d)
                if nd > 1e-9:
                    bisectors.append(d / nd)
    bisectors = np.array(bisectors) if bisectors else np.zeros((0, s.dim))
    checked = 0
    for rho in rhos:
        base = s.intersection.sample_near(s.xbar, s.delta, per // 4, s.seed + 17)
        if not len(base):
            base = s.xbar[None, :]
        cand = [uniform_ball(rng, s.xbar, s.delta, per)]
        dirs = rng.normal(size=(per // 4, s.dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        if len(bisectors):
            pick = bisectors[rng.integers(0, len(bisectors), size=per // 2)]
            dirs = np.concatenate([dirs, pick], axis=0)
        anchors = base[rng.integers(0, len(base), size=len(dirs))]
        # radii concentrate just above rho, where the inclusion first breaks
        eta = alpha * rng.random((len(dirs), 1)) ** 2
        cand.append(anchors + rho * (1.0 + eta) * dirs)
        X = np.concatenate(cand, axis=0)
        X = X[np.linalg.norm(X - s.xbar, axis=1) < s.delta]
        in_tubes = (s.set_a.distances(X) < alpha * rho) & (s.set_b.distances(X) < alpha * rho)
        X = X[in_tubes]
        if not len(X):
            continue
        checked += len(X)
        d_int = s.intersection.distances(X)
        bad = d_int > rho * (1 + 1e-9) + 1e-12
        if np.any(bad):
            i = int(np.argmax(d_int))
            return CheckResult(False, certified=True, samples=checked,
                               witness=(float(rho), tuple(X[i])))
    return CheckResult(True, certified=False, samples=checked, vacuous=checked == 0)


# ---------------------------------------------------------------------------
# Dual estimates
# ---------------------------------------------------------------------------

def _scenario_cones(s: PairScenario) -> tuple[Cone, Cone]:
    na = limiting_normal_cone(s.set_a, s.xbar, delta_sample=s.delta / 4, budget=64, seed=s.seed)
    nb = limiting_normal_cone(s.set_b, s.xbar, delta_sample=s.delta / 4, budget=64, seed=s.seed + 1)
    return na, nb


def _sampled_gamma_min(na: Cone, nb: Cone, budget: int, seed: int) -> float:
    m = max(int(np.sqrt(budget)), 16)
    d1, _ = unit_directions(na, budget=m, seed=seed)
    d2, _ = unit_directions(nb, budget=m, seed=seed + 1)
    return float(np.min(d1 @ d2.T))


def r_dual_estimate(s: PairScenario, method: str = "auto", budget: int | None = None) -> Estimate:
    """min ||v1 + v2|| over the normalization ||v1|| + ||v2|| = 1; equals r.

    The normalization is scanned by v1 = t u1, v2 = (1-t) u2 over unit cone
    directions; the minimum over t sits at t = 1/2, giving sqrt((1+g)/2) for
    the extreme pairing cosine g.
    """
    na, nb = _scenario_cones(s)
    if cone_is_trivial(na) or cone_is_trivial(nb):
        return Estimate(None, "exact", 0, flag="saturated")
    if method == "sampled":
        g = _sampled_gamma_min(na, nb, budget or s.budget, s.seed + 5)
        return Estimate(float(np.sqrt(max(1 + g, 0.0) / 2)), "upper", budget or s.budget)
    ext = pair_extreme_cos(na, nb, budget=budget or 2048, seed=s.seed + 5)
    gmin, _, exact = ext
    value = float(np.sqrt(max(1 + gmin, 0.0) / 2))
    return Estimate(value, "exact" if exact else "upper", budget or 2048)


@dataclass
class DualConstants:
    r: Estimate
    rgd: Estimate
    rgdd: Estimate
    rga: Estimate
    residuals: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "r": self.r.to_dict(), "rgd": self.rgd.to_dict(),
            "rgdd": self.rgdd.to_dict(), "rga": self.rga.to_dict(),
            "residuals": dict(self.residuals),
        }


def dual_siblings(s: PairScenario, method: str = "auto", budget: int | None = None) -> DualConstants:
    """The dual constants (r, rgd, rgdd, rga) and their identity residuals.

    Exact subspace path: the extreme pairing cosine comes from a singular
    value, the minimal summed squared distance from an eigenvalue.
    """
    na, nb = _scenario_cones(s)
    if cone_is_trivial(na) or cone_is_trivial(nb):
        sat = Estimate(None, "exact", 0, flag="saturated")
        return DualConstants(sat, sat, sat, sat, {})
    bud = budget or s.budget
    if method == "sampled":
        g = _sampled_gamma_min(na, nb, bud, s.seed + 5)
        exact = False
        rgdd_val = _sampled_rgdd(na, nb, bud, s.seed + 6)
    else:
        g, _, exact = pair_extreme_cos(na, nb, budget=bud, seed=s.seed + 5)
        rgdd_sq, rgdd_exact = min_sum_sq_dist(na, cone_negate(nb), budget=bud, seed=s.seed + 6)
        rgdd_val = float(np.sqrt(max(rgdd_sq, 0.0)))
        exact = exact and rgdd_exact
    # Clamp square roots of near-machine-zero quantities: the sqrt would
    # otherwise amplify eigen/SVD noise to ~1e-8 and break exact identities.
    if 1 + g < 1e-12:
        g = -1.0
    if rgdd_val < 1e-6 and rgdd_val**2 < 1e-11:
        rgdd_val = 0.0
    side = "exact" if exact else "upper"
    r = Estimate(float(np.sqrt(max(1 + g, 0.0) / 2)), side, bud)
    rgd = Estimate(float(np.sqrt(max(1 - g, 0.0) / 2)), "exact" if exact else "lower", bud)
    rga = Estimate(float(-g), "exact" if exact else "lower", bud)
    rgdd = Estimate(rgdd_val, side, bud)
    res = {
        "r2_plus_rgd2_minus_1": r.value**2 + rgd.value**2 - 1.0,
        "rgdd_minus_sqrt2_r": rgdd.value - np.sqrt(2.0) * r.value,
        "rga_plus_2r2_minus_1": rga.value + 2 * r.value**2 - 1.0,
        "rga_plus_rgdd2_minus_1": rga.value + rgdd.value**2 - 1.0,
    }
    return DualConstants(r, rgd, rgdd, rga, {k: float(v) for k, v in res.items()})


def _cone_distances_batch(cone: Cone, V: np.ndarray) -> np.ndarray:
    if isinstance(cone, Subspace):
        if cone.dim == 0:
            return np.linalg.norm(V, axis=1)
        return np.linalg.norm(V - (V @ cone.basis.T) @ cone.basis, axis=1)
    if isinstance(cone, (RayUnion, SampledCone)):
        rays = cone.rays
        if rays.shape[0] == 0:
            return np.linalg.norm(V, axis=1)
        t = np.maximum(V @ rays.T, 0.0)
        res = V[:, None, :] - t[:, :, None] * rays[None, :, :]
        return np.min(np.linalg.norm(res, axis=2), axis=1)
    return np.array([cone_distance(cone, v) for v in V])


def _sampled_rgdd(na: Cone, nb: Cone, budget: int, seed: int) -> float:
    rng = make_rng(seed)
    n = na.basis.shape[1] if isinstance(na, Subspace) else (
        na.generators.shape[1] if isinstance(na, ConvexCone) else na.rays.shape[1])
    V = rng.normal(size=(budget, n))
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    vals = _cone_distances_batch(na, V) ** 2 + _cone_distances_batch(cone_negate(nb), V) ** 2
    return float(np.sqrt(max(float(np.min(vals)), 0.0)))


# ---------------------------------------------------------------------------
# Qualitative dual conditions
# ---------------------------------------------------------------------------

def transversality_condition_check(s: PairScenario) -> CheckResult:
    """N_A(xbar) cap (-N_B(xbar)) = {0}: exact for structured cone pairs."""
    na, nb = _scenario_cones(s)
    trivial, certified = cones_intersect_trivially(na, cone_negate(nb))
    return CheckResult(trivial, certified=certified)


def manifold_transversality_check(s: PairScenario) -> tuple[CheckResult, float]:
    """Tangent-sum surjectivity plus the Friedrichs cosine of the pair.

    Reports both the tangent-space and normal-space cosines; the two agree
    by the complement identity and the detail dict carries both.
    """
    ta = tangent_space(s.set_a, s.xbar)
    tb = tangent_space(s.set_b, s.xbar)
    stacked = np.concatenate([ta.basis, tb.basis], axis=0) if ta.dim + tb.dim else np.zeros((0, s.dim))
    full = orthonormal_rows(stacked).shape[0] == s.dim
    c_t = friedrichs_cosine(ta, tb)
    c_n = friedrichs_cosine(orthogonal_complement(ta), orthogonal_complement(tb))
    detail = {"cos_tangent": c_t, "cos_normal": c_n}
    return CheckResult(full, certified=True, detail=detail), c_t


def _filtered_pool(spec: SetSpec, other: SetSpec, s: PairScenario, seed: int,
                   count: int) -> np.ndarray:
    """Points of spec \\ other inside the scenario ball, multi-scale."""
    parts = []
    for scale, c in ((s.delta, count), (s.delta / 8, count // 2)):
        pts = spec.sample_near(s.xbar, scale, c, seed)
        if len(pts):
            parts.append(pts)
        seed += 1
    if not parts:
        return np.zeros((0, s.dim))
    X = np.concatenate(parts, axis=0)
    return X[other.distances(X) > 1e-9]


def _augment_with_projections(pool, target: SetSpec, other: SetSpec, s: PairScenario):
    """Add projections of the opposite pool onto `target` (minus `other`).

    The intrinsic infimum is typically attained on projection pairs
    b = P_B(a), which plain sampling essentially never hits.
    """
    extra = []
    for x in pool:
        for p in target.project(x).points:
            if other.distance(p) > 1e-9 and np.linalg.norm(p - s.xbar) < s.delta:
                extra.append(p)
    return np.array(extra) if extra else np.zeros((0, s.dim))


def intrinsic_transversality_estimate(s: PairScenario, kind: str = "limiting",
                                      n_points: int = 40) -> Estimate:
    """inf over a in A\\B, b in B\\A of the larger normalized cone distance."""
    pool_a = _filtered_pool(s.set_a, s.set_b, s, s.seed + 21, s.budget // 8)
    pool_b = _filtered_pool(s.set_b, s.set_a, s, s.seed + 23, s.budget // 8)
    if len(pool_a) == 0 or len(pool_b) == 0:
        return Estimate(None, "upper", 0, flag="vacuous")
    pool_a = pool_a[:n_points]
    pool_b = pool_b[:n_points]
    proj_b = _augment_with_projections(pool_a, s.set_b, s.set_a, s)
    proj_a = _augment_with_projections(pool_b, s.set_a, s.set_b, s)
    if len(proj_b):
        pool_b = np.concatenate([pool_b, proj_b[: n_points // 2]])
    if len(proj_a):
        pool_a = np.concatenate([pool_a, proj_a[: n_points // 2]])
    cone_of = proximal_normal_cone if kind == "proximal" else limiting_normal_cone
    cones_a = [cone_of(s.set_a, a) for a in pool_a]
    cones_b = [cone_of(s.set_b, b) for b in pool_b]
    best = np.inf
    witness = None
    for a, ca in zip(pool_a, cones_a):
        diff = pool_b - a
        norms = np.linalg.norm(diff, axis=1)
        keep = norms > 1e-12
        if not np.any(keep):
            continue
        U = diff[keep] / norms[keep, None]
        d_a = _cone_distances_batch(ca, U)
        for j, (b, cb) in enumerate(zip(pool_b[keep], np.array(cones_b, dtype=object)[keep])):
            val = max(float(d_a[j]), cone_distance(cb, -U[j]))
            if val < best:
                best = val
                witness = (tuple(a), tuple(b))
    if not np.isfinite(best):
        return Estimate(None, "upper", 0, flag="vacuous")
    return Estimate(float(best), "upper", len(pool_a) * len(pool_b), witness=witness)


def separable_intersection_check(s: PairScenario, alpha: float, swap: bool = False) -> CheckResult:
    """Does set_b intersect set_a separably at xbar with constant alpha?

    swap=True tests the other order (the notion is not symmetric).
    """
    A, B = (s.set_b, s.set_a) if swap else (s.set_a, s.set_b)
    pool = _filtered_pool(A, B, s, s.seed + 31 + int(swap), s.budget // 8)[:64]
    checked = 0
    sup = -np.inf
    worst = None
    for a1 in pool:
        for b in B.project(a1).points:
            if A.distance(b) <= 1e-9 or np.linalg.norm(b - s.xbar) >= s.delta:
                continue
            for a2 in A.project(b).points:
                if np.linalg.norm(a2 - s.xbar) >= s.delta:
                    continue
                n1 = np.linalg.norm(a1 - b)
                n2 = np.linalg.norm(a2 - b)
                if n1 <= 1e-12 or n2 <= 1e-12:
                    continue
                checked += 1
                val = float((a1 - b) @ (a2 - b)) / (n1 * n2)
                if val > sup:
                    sup = val
                    worst = (tuple(a1), tuple(b), tuple(a2))
    if checked == 0:
        return CheckResult(True, certified=False, vacuous=True)
    passed = sup < alpha - 1e-12
    return CheckResult(passed, certified=not passed, samples=checked, witness=worst,
                       detail={"sup_cos": sup})


def inherent_transversality_check(s: PairScenario, alpha: float) -> CheckResult:
    """Angle condition on projection quadruples (a1, b2, a2, b1)."""
    pool_a = _filtered_pool(s.set_a, s.set_b, s, s.seed + 41, s.budget // 8)[:48]
    pool_b = _filtered_pool(s.set_b, s.set_a, s, s.seed + 43, s.budget // 8)[:48]
    checked = 0
    sup = -np.inf
    worst = None
    proj_b2 = [s.set_b.project(a1).points for a1 in pool_a]
    proj_a2 = [s.set_a.project(b1).points for b1 in pool_b]
    for a1, b2s in zip(pool_a, proj_b2):
        for b1, a2s in zip(pool_b, proj_a2):
            for b2 in b2s:
                for a2 in a2s:
                    n1 = np.linalg.norm(a1 - b2)
                    n2 = np.linalg.norm(a2 - b1)
                    if n1 <= 1e-12 or n2 <= 1e-12:
                        continue
                    checked += 1
                    val = float((a1 - b2) @ (a2 - b1)) / (n1 * n2)
                    if val > sup:
                        sup = val
                        worst = (tuple(a1), tuple(b1))
    if checked == 0:
        return CheckResult(True, certified=False, vacuous=True)
    passed = sup < alpha - 1e-12
    return CheckResult(passed, certified=not passed, samples=checked, witness=worst,
                       detail={"sup_cos": sup})


def ab_qualification_check(s: PairScenario, alpha: float) -> CheckResult:
    """-<v1, v2> < alpha over the two restricted limiting cones at xbar."""
    ca = restricted_normal_cone(s.set_a, s.set_b, s.xbar, kind="limiting",
                                delta_sample=s.delta, budget=max(s.budget // 8, 128),
                                seed=s.seed + 51)
    cb = restricted_normal_cone(s.set_b, s.set_a, s.xbar, kind="limiting",
                                delta_sample=s.delta, budget=max(s.budget // 8, 128),
                                seed=s.seed + 53)
    if cone_is_trivial(ca) or cone_is_trivial(cb):
        return CheckResult(True, certified=False, vacuous=True)
    dots = ca.rays @ cb.rays.T
    sup = float(np.max(-dots))
    passed = sup < alpha - 1e-9
    return CheckResult(passed, certified=not passed, samples=int(dots.size),
                       detail={"sup_cos": sup})


def dual_subtransversality_sufficient_check(s: PairScenario, alpha: float) -> CheckResult:
    """Angle-filtered Frechet-normal condition; on success implies sr >= alpha.

    The filters require the normals to align with x - a (resp. x - b) up to
    1 - delta; the minimum of ||v1 + v2|| over the admissible normalization
    is sqrt((1 + <u1,u2>)/2) per direction pair.
    """
    rng = make_rng(s.seed + 61)
    X = uniform_ball(rng, s.xbar, s.delta, 24)
    min_norm = np.inf
    worst = None
    pairs = 0
    for x in X:
        as_ = s.set_a.sample_near(x, s.delta * 0.999, 12, s.seed + 63)
        bs_ = s.set_b.sample_near(x, s.delta * 0.999, 12, s.seed + 64)
        u1s = []
        for a in as_:
            gap = x - a
            ng = np.linalg.norm(gap)
            if ng <= 1e-12:
                continue
            dirs, _ = unit_directions(frechet_normal_cone(s.set_a, a), budget=8, seed=s.seed)
            u1s.extend([u for u in dirs if float(u @ gap) > (1 - s.delta) * ng])
        u2s = []
        for b in bs_:
            gap = x - b
            ng = np.linalg.norm(gap)
            if ng <= 1e-12:
                continue
            dirs, _ = unit_directions(frechet_normal_cone(s.set_b, b), budget=8, seed=s.seed)
            u2s.extend([u for u in dirs if float(u @ gap) > (1 - s.delta) * ng])
        for u1 in u1s:
            for u2 in u2s:
                pairs += 1
                val = float(np.sqrt(max(1 + float(u1 @ u2), 0.0) / 2))
                if val < min_norm:
                    min_norm = val
                    worst = (tuple(x), tuple(u1), tuple(u2))
    if pairs == 0:
        return CheckResult(True, certified=False, vacuous=True)
    passed = min_norm > alpha
    return CheckResult(passed, certified=not passed, samples=pairs, witness=worst,
                       detail={"min_norm": float(min_norm), "implied_sr_lower": alpha if passed else None})


def holder_pairing_check(s: PairScenario, alpha: float, c: float, margin: float = 0.05) -> CheckResult:
    """Separable intersection + Hoelder regularity of B relative to A combined.

    Requires alpha + 2c < 1, then verifies the implied subtransversality
    inequality (1-gamma)/(1+gamma) d(a, A cap B) <= d(a, B) on samples with
    gamma = max{alpha + 2c, 1/(1+c^2)} + margin.
    """
    from .elemental import holder_regularity_check

    if alpha + 2 * c >= 1:
        raise ValueError("constants do not satisfy alpha + 2c < 1")
    sep = separable_intersection_check(s, alpha)
    hol = holder_regularity_check(s.set_b, s.set_a, s.xbar, 0.0, c,
                                  w_radius=s.delta, budget=max(s.budget // 8, 128),
                                  seed=s.seed + 71)
    if not (sep.passed and hol.passed):
        return CheckResult(False, certified=sep.certified or hol.certified,
                           detail={"separable": sep.to_dict(), "holder": hol.to_dict()})
    gamma = min(max(alpha + 2 * c, 1.0 / (1.0 + c**2)) + margin, 1 - 1e-9)
    bound = (1 - gamma) / (1 + gamma)
    pts = s.set_a.sample_near(s.xbar, s.delta / 3, max(s.budget // 8, 128), s.seed + 73)
    if len(pts) == 0:
        return CheckResult(True, certified=False, vacuous=True)
    lhs = bound * s.intersection.distances(pts)
    rhs = s.set_b.distances(pts)
    bad = lhs > rhs + 1e-9
    if np.any(bad):
        i = int(np.argmax(lhs - rhs))
        return CheckResult(False, certified=True, samples=len(pts), witness=(tuple(pts[i]),),
                           detail={"gamma": gamma, "implied_sr_lower": bound})
    return CheckResult(True, certified=False, samples=len(pts),
                       detail={"gamma": gamma, "implied_sr_lower": bound})


def chip_inclusion_check(s: PairScenario) -> CheckResult:
    """N_{A cap B}(xbar) inside N_A(xbar) + N_B(xbar), generator-wise."""
    n_int = limiting_normal_cone(s.intersection, s.xbar, delta_sample=s.delta / 4,
                                 budget=64, seed=s.seed)
    if isinstance(n_int, SampledCone):
        return CheckResult(True, certified=False, vacuous=True,
                           detail={"flag": "not-checkable"})
    na, nb = _scenario_cones(s)
    if isinstance(n_int, Subspace):
        dirs = np.concatenate([n_int.basis, -n_int.basis]) if n_int.dim else np.zeros((0, s.dim))
    elif isinstance(n_int, ConvexCone):
        dirs = n_int.generators
    else:
        dirs = n_int.rays
    for v in dirs:
        if not minkowski_contains(na, nb, v):
            return CheckResult(False, certified=True, witness=(tuple(v),))
    return CheckResult(True, certified=True, samples=len(dirs))


# ---------------------------------------------------------------------------
# Set-valued mapping view
# ---------------------------------------------------------------------------

@dataclass
class SvmReport:
    sr_f: Estimate
    r_f: Estimate
    sr_g: Estimate
    r_g: Estimate
    strong_subtransversal: bool
    f3mod_bounds: tuple
    f3mod2_bounds: tuple

    def to_dict(self):
        return {
            "sr_f": self.sr_f.to_dict(), "r_f": self.r_f.to_dict(),
            "sr_g": self.sr_g.to_dict(), "r_g": self.r_g.to_dict(),
            "strong_subtransversal": self.strong_subtransversal,
            "f3mod_bounds": list(self.f3mod_bounds),
            "f3mod2_bounds": list(self.f3mod2_bounds),
        }


def _g_inverse_distance(s: PairScenario, x1, x2, y) -> float | None:
    """Distance from (x1, x2) to G^{-1}(y) = {(b + y, b): b in (A - y) cap B}."""
    inter, certified = intersect_specs(s.set_a.translate(-np.asarray(y)), s.set_b)
    if inter is None:
        if not certified and s.set_a.convex and s.set_b.convex:
            inter = _IterativeIntersection(s.set_a.translate(-np.asarray(y)), s.set_b)
        else:
            return None
    mid = 0.5 * (np.asarray(x1) - np.asarray(y) + np.asarray(x2))
    if isinstance(inter, _IterativeIntersection):
        d_mid = inter.distance(mid)
        if d_mid is None:
            return None
    else:
        d_mid = inter.distance(mid)
    gap = np.asarray(x1) - np.asarray(y) - np.asarray(x2)
    return float(np.sqrt(2 * d_mid**2 + 0.5 * float(gap @ gap)))


def svm_view(s: PairScenario) -> SvmReport:
    """Metric (sub)regularity constants of the two canonical set-valued maps.

    F(x) = (A - x) x (B - x) under the max norm on the product: the distance
    d((0,0), F(x)) is max{d(x,A), d(x,B)} and F^{-1}(0,0) = A cap B, so its
    subregularity constant is estimated by exactly the subtransversality
    ratio (fresh seeds make it an honest cross-check).  G(x1,x2) = x1 - x2
    on A x B under the Euclidean product norm.
    """
    sr_f = sr_metric_estimate(s, seed_shift=7700)
    r_f = r_metric_estimate(s, seed_shift=7700)

    # G-based constants.
    budget = max(s.budget // 8, 128)
    xs1 = s.set_a.sample_near(s.xbar, s.delta, budget, s.seed + 81)
    xs2 = s.set_b.sample_near(s.xbar, s.delta, budget, s.seed + 83)
    rng = make_rng(s.seed + 85)
    sr_vals = []
    sr_wit = None
    n_pairs = min(len(xs1), len(xs2))
    for i in range(n_pairs):
        x1, x2 = xs1[i], xs2[i]
        if np.sqrt(np.sum((x1 - s.xbar) ** 2) + np.sum((x2 - s.xbar) ** 2)) >= s.delta:
            continue
        d_inv = _g_inverse_distance(s, x1, x2, np.zeros(s.dim))
        if d_inv is None or d_inv <= _EXCL_TOL:
            continue
        val = float(np.linalg.norm(x1 - x2)) / d_inv
        sr_vals.append(val)
        if val <= min(sr_vals):
            sr_wit = (tuple(x1), tuple(x2))
    sr_g = (Estimate(float(np.min(sr_vals)), "upper", len(sr_vals), witness=sr_wit)
            if sr_vals else Estimate(None, "upper", 0, flag="degenerate"))

    r_vals = []
    shifts = uniform_ball(rng, np.zeros(s.dim), s.delta / 2, 12)
    for y in shifts:
        for i in range(0, n_pairs, max(n_pairs // 16, 1)):
            x1, x2 = xs1[i], xs2[i]
            d_inv = _g_inverse_distance(s, x1, x2, y)
            if d_inv is None or d_inv <= _EXCL_TOL:
                continue
            r_vals.append(float(np.linalg.norm(x1 - x2 - y)) / d_inv)
    r_g = (Estimate(float(np.min(r_vals)), "upper", len(r_vals))
           if r_vals else Estimate(None, "upper", 0, flag="no-information"))

    probe = s.intersection.sample_near(s.xbar, s.delta, 64, s.seed + 87)
    strong = bool(len(probe) == 0 or np.all(np.linalg.norm(probe - s.xbar, axis=1) <= 1e-9))

    def bounds(const: float | None) -> tuple:
        if const is None:
            return (None, None)
        lo = float(np.sqrt(2.0 / (1.0 + const**-2))) if const > 0 else 0.0
        denom = max(1.0 / const - 1.0, 0.0) if const > 0 else np.inf
        hi = float(2.0 / denom) if denom > 0 else np.inf
        return (lo, hi)

    return SvmReport(sr_f, r_f, sr_g, r_g, strong,
                     bounds(sr_f.value), bounds(r_f.value if r_f.ok else None))


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------

@dataclass
class ConstantsReport:
    scenario: str
    sr: Estimate
    srr: Estimate
    r_metric: Estimate
    dual: DualConstants
    friedrichs: float | None
    itrans: Estimate
    itrans_prox: Estimate
    transversal_condition: CheckResult
    ab_qualification: CheckResult
    inherent: CheckResult
    separable: CheckResult
    saturated: bool
    svm: SvmReport | None = None
    chip: CheckResult | None = None

    @property
    def r_hat(self) -> Estimate:
        return self.dual.r

    def to_dict(self):
        out = {
            "scenario": self.scenario,
            "sr": self.sr.to_dict(),
            "srr": self.srr.to_dict(),
            "r_metric": self.r_metric.to_dict(),
            "dual": self.dual.to_dict(),
            "friedrichs": self.friedrichs,
            "itrans": self.itrans.to_dict(),
            "itrans_prox": self.itrans_prox.to_dict(),
            "flags": {
                "transversal_condition": self.transversal_condition.to_dict(),
                "ab_qualification": self.ab_qualification.to_dict(),
                "inherent": self.inherent.to_dict(),
                "separable": self.separable.to_dict(),
            },
            "saturated": self.saturated,
        }
        if self.svm is not None:
            out["svm"] = self.svm.to_dict()
        if self.chip is not None:
            out["chip"] = self.chip.to_dict()
        return out


def analyze_pair(s: PairScenario, with_svm: bool = True, alpha_probe: float = 0.999) -> ConstantsReport:
    sr = sr_metric_estimate(s)
    srr = srr_estimate(s)
    r_metric = r_metric_estimate(s)
    dual = dual_siblings(s)
    cond = transversality_condition_check(s)
    itrans = intrinsic_transversality_estimate(s, kind="limiting")
    itrans_p = intrinsic_transversality_estimate(s, kind="proximal")
    qual = ab_qualification_check(s, alpha_probe)
    inher = inherent_transversality_check(s, alpha_probe)
    sep = separable_intersection_check(s, alpha_probe)
    saturated = sr.flag == "saturated" or dual.r.flag == "saturated"
    fried = None
    try:
        _, fried = manifold_transversality_check(s)
    except TypeError:
        pass
    svm = svm_view(s) if with_svm else None
    chip = chip_inclusion_check(s)
    return ConstantsReport(s.name, sr, srr, r_metric, dual, fried, itrans, itrans_p,
                           cond, qual, inher, sep, saturated, svm, chip)


@dataclass
class AuditEntry:
    name: str
    passed: bool
    detail: str = ""


def _positively_homogeneous(spec: SetSpec, xbar: np.ndarray) -> bool:
    """True when spec - xbar is a cone, making the constants scale invariant."""
    if isinstance(spec, AffineSubspace):
        return spec.distance(xbar) <= 1e-9
    if isinstance(spec, HalfSpace):
        return abs(float(spec.normal @ xbar) - spec.offset) <= 1e-9
    if isinstance(spec, ConvexPolyhedron):
        return bool(np.allclose(spec.normals @ xbar, spec.offsets, atol=1e-9))
    if isinstance(spec, UnionOfSets):
        return all(_positively_homogeneous(m, xbar) for m in spec.members)
    return False


def implication_audit(s: PairScenario, report: ConstantsReport | None = None,
                      tol: float = 2e-2, positive_tol: float = 5e-2) -> list[AuditEntry]:
    """Assert every cross-route relation the theory states, on one scenario.

    Dual constants are limits at xbar while metric estimates live at the
    scenario radius; the two routes are compared quantitatively only on
    scale-invariant scenarios (cone-like sets), where they must agree.
    Qualitative implications fire only when the antecedent estimate clears
    positive_tol: a barely-positive sampled infimum is not a certificate.
    """
    rep = report or analyze_pair(s)
    out: list[AuditEntry] = []

    def add(name, passed, detail=""):
        out.append(AuditEntry(name, bool(passed), detail))

    if rep.saturated:
        add("saturation-coherence", rep.sr.flag == "saturated" and rep.dual.r.flag == "saturated",
            "interior case saturates both sr and r")
        return out

    scale_inv = (_positively_homogeneous(s.set_a, s.xbar)
                 and _positively_homogeneous(s.set_b, s.xbar))
    dim_tol = max(tol, 2.0 * s.budget ** (-1.0 / s.dim))
    sr, srr, r = rep.sr, rep.srr, rep.dual.r
    if sr.ok and srr.ok:
        add("sandwich-srr", srr.value / (srr.value + 2) - tol <= sr.value <= srr.value + tol,
            f"sr={sr.value:.5f} srr={srr.value:.5f}")
    if sr.ok and rep.r_metric.ok:
        add("r-below-sr", rep.r_metric.value <= sr.value + dim_tol,
            f"r_metric={rep.r_metric.value:.5f} sr={sr.value:.5f}")
    if scale_inv and sr.ok and r.ok:
        add("r-dual-below-sr", r.value <= sr.value + dim_tol,
            f"r={r.value:.5f} sr={sr.value:.5f}")
    if scale_inv and r.ok and rep.r_metric.ok:
        add("r-dual-vs-metric", r.value <= rep.r_metric.value + dim_tol,
            f"dual={r.value:.5f} metric={rep.r_metric.value:.5f}")
    if all(e.ok for e in (rep.dual.r, rep.dual.rgd, rep.dual.rgdd, rep.dual.rga)):
        limit = 1e-9 if rep.dual.r.side == "exact" else 1e-3
        worst = max(abs(v) for v in rep.dual.residuals.values())
        add("dual-identities", worst < limit, f"worst residual {worst:.2e} (limit {limit:.0e})")
    if rep.transversal_condition.certified and rep.dual.r.side == "exact":
        add("condition-vs-r", rep.transversal_condition.passed == (r.ok and r.value > 1e-9),
            f"condition={rep.transversal_condition.passed} r={r.value if r.ok else None}")
    qual_v = rep.ab_qualification.passed or rep.ab_qualification.vacuous
    inher_v = rep.inherent.passed or rep.inherent.vacuous
    sep_v = rep.separable.passed or rep.separable.vacuous
    add("qualification-implies-inherent", (not qual_v) or inher_v)
    add("inherent-implies-separable", (not inher_v) or sep_v)
    if rep.itrans.ok and rep.itrans.value > positive_tol:
        add("intrinsic-implies-separable", sep_v,
            f"itrans={rep.itrans.value:.5f}")
        if sr.ok:
            add("intrinsic-implies-subtransversal", sr.value > positive_tol / 4,
                f"itrans={rep.itrans.value:.5f} sr={sr.value:.5f}")
    if rep.chip is not None and sr.ok and sr.value > positive_tol and rep.chip.certified:
        add("chip-under-subtransversality", rep.chip.passed)
    if rep.svm is not None and rep.svm.sr_f.ok and sr.ok and sr.value > positive_tol:
        add("svm-sr-consistency", abs(rep.svm.sr_f.value - sr.value) < dim_tol,
            f"sr[F]={rep.svm.sr_f.value:.5f} sr={sr.value:.5f}")
        lo, hi = rep.svm.f3mod_bounds
        if rep.svm.sr_g.ok and lo is not None:
            add("f3mod-sandwich", lo - dim_tol <= rep.svm.sr_g.value <= (hi if hi is not None else np.inf) + dim_tol,
                f"sr[G]={rep.svm.sr_g.value:.5f} in [{lo:.5f}, {hi}]")
    return out
