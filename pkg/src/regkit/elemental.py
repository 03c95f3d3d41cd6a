"""Pointwise regularity of a single set: moduli estimators and the classifier ladder.

The central object is the subregularity inequality

    <v - (b - b_A), b_A - a>  <=  eps * ||v - (b - b_A)||^(1+sigma) * ||b_A - a||

quantified over b in the companion set and b_A among its nearest points in A.
All sampled suprema are lower bounds of the true modulus; checkers certify
failure exactly through witnesses but success only statistically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cones import (
    cone_equal,
    cone_is_trivial,
    frechet_normal_cone,
    limiting_normal_cone,
    proximal_normal_cone,
    restricted_normal_cone,
    unit_directions,
)
from .estimates import CheckResult, Estimate
from .sets import AffineSubspace, SetSpec, inverse_projector_contains, make_rng, uniform_ball

__all__ = [
    "ElementalQuery",
    "ClassifyConfig",
    "RegularityLadderReport",
    "singleton",
    "elemental_subregularity_modulus",
    "elemental_regularity_check",
    "holder_regularity_check",
    "eps_delta_subregularity_modulus",
    "clarke_regularity_check",
    "super_regularity_delta",
    "prox_regularity_check",
    "classify",
    "LADDER_ORDER",
]

_RATIO_EPS = 1e-12  # 0/0 terms are outside the inequality's domain and are skipped


def singleton(point) -> AffineSubspace:
    """The one-point set {point} as a zero-dimensional affine subspace."""
    p = np.asarray(point, dtype=float)
    return AffineSubspace(np.zeros((0, p.shape[0])), p)


def _companion_samples(companion: SetSpec | None, xbar: np.ndarray, radius: float,
                       budget: int, seed: int) -> np.ndarray:
    """Points of the companion set inside B_radius(xbar); None means full space."""
    if companion is None:
        return uniform_ball(make_rng(seed), xbar, radius, budget)
    return companion.sample_near(xbar, radius, budget, seed)


@dataclass(frozen=True)
class ElementalQuery:
    """One subregularity question: set, companion, base pair (a, v), order."""

    set_a: SetSpec
    xbar: np.ndarray
    base: np.ndarray
    direction: np.ndarray
    relative_to: SetSpec | None = None  # None = full space
    order: float = 0.0
    u_radius: float = 1.0
    budget: int = 512
    seed: int = 0


def elemental_subregularity_modulus(q: ElementalQuery) -> Estimate:
    """Empirical supremum of the subregularity ratio for one pair (a, v)."""
    xbar = np.asarray(q.xbar, dtype=float)
    a = np.asarray(q.base, dtype=float)
    v = np.asarray(q.direction, dtype=float)
    bs = _companion_samples(q.relative_to, xbar, q.u_radius, q.budget, q.seed)
    if bs.shape[0] == 0:
        return Estimate(None, "lower", 0, flag="insufficient-samples")
    best = 0.0
    witness = None
    used = 0
    for b in bs:
        for b_a in q.set_a.project(b).points:
            w = v - (b - b_a)
            gap = b_a - a
            den = float(np.linalg.norm(w) ** (1.0 + q.order) * np.linalg.norm(gap))
            if den <= _RATIO_EPS:
                continue
            used += 1
            ratio = float(w @ gap) / den
            if ratio > best:
                best = ratio
                witness = (tuple(b), tuple(b_a))
    if used == 0:
        return Estimate(0.0, "lower", 0, flag="vacuous")
    return Estimate(best, "lower", used, witness=witness)


def elemental_regularity_check(set_a: SetSpec, xbar, a, v, sigma: float, eps: float,
                               u_radius: float = 1.0, v_radius: float = 0.5,
                               budget: int = 512, seed: int = 0) -> CheckResult:
    """Test the order-sigma inequality with B := A for all sampled u near v in the cone.

    A false verdict carries a violating triple (u, b, b_A); a true verdict is
    statistical (certified only through the sampled directions and points).
    """
    xbar = np.asarray(xbar, dtype=float)
    a = np.asarray(a, dtype=float)
    v = np.asarray(v, dtype=float)
    cone = limiting_normal_cone(set_a, a)
    dirs, _ = unit_directions(cone, budget=64, seed=seed)
    nv = np.linalg.norm(v)
    cands = [v] if nv > 0 else []
    for u in dirs:
        for scale in (1.0, max(nv, 1e-3)):
            cand = scale * u
            if np.linalg.norm(cand - v) <= v_radius and np.linalg.norm(cand) > 0:
                cands.append(cand)
    bs = set_a.sample_near(xbar, u_radius, budget, seed + 1)
    checked = 0
    for u in cands:
        nu = float(np.linalg.norm(u))
        for b in bs:
            gap = b - a
            den = nu ** (1.0 + sigma) * float(np.linalg.norm(gap))
            if den <= _RATIO_EPS:
                continue
            checked += 1
            if float(u @ gap) > eps * den + 1e-12:
                return CheckResult(False, certified=True, samples=checked,
                                   witness=(tuple(u), tuple(b), tuple(b)))
    return CheckResult(True, certified=False, samples=checked, vacuous=checked == 0)


def holder_regularity_check(set_a: SetSpec, companion: SetSpec, xbar, sigma: float,
                            c: float, w_radius: float = 0.5, budget: int = 256,
                            seed: int = 0) -> CheckResult:
    """Order-sigma Hoelder regularity of set_a relative to companion at xbar.

    Verifies emptiness of A cap V cap B_{(1+c)||b-b_A||}(b) on samples, where V
    collects the points of the companion's projector preimage at b that beat
    the angular threshold sqrt(c)||b-b_A||^(sigma+1)||x-b_A||.  Candidate
    offenders are polished onto the exact preimage before being tested, since
    raw samples essentially never satisfy the preimage condition exactly.
    """
    from .cones import _solve_preimage_in_restriction

    if c <= 0:
        raise ValueError("Hoelder constant must be positive")
    xbar = np.asarray(xbar, dtype=float)
    bs = companion.sample_near(xbar, w_radius, budget, seed)
    sqrt_c = np.sqrt(c)
    qualified = 0
    worst = None
    worst_margin = -np.inf

    def margin_at(x, b, b_a, ngap):
        nx = float(np.linalg.norm(x - b_a))
        if nx <= _RATIO_EPS:
            return None
        lhs = float((b - b_a) @ (x - b_a))
        return lhs - sqrt_c * ngap ** (sigma + 1.0) * nx

    for i, b in enumerate(bs):
        res = set_a.project(b)
        if res.distance <= _RATIO_EPS:
            continue
        for b_a in res.points:
            if np.linalg.norm(b_a - xbar) >= w_radius:
                continue
            qualified += 1
            ngap = float(np.linalg.norm(b - b_a))
            radius = (1.0 + c) * ngap
            xs = set_a.sample_near(b, radius, max(budget // 8, 32), seed + 91 * i)
            if xs.shape[0] == 0:
                continue
            # Rank raw candidates by angular margin, polish the most promising
            # onto A cap P_companion^{-1}(b) and re-test there.
            margins = [(margin_at(x, b, b_a, ngap), x) for x in xs]
            margins = [(m, x) for m, x in margins if m is not None]
            margins.sort(key=lambda t: -t[0])
            for _, x0 in margins[:12]:
                x = _solve_preimage_in_restriction(companion, set_a, b, x0)
                if x is None:
                    continue
                if np.linalg.norm(x - b) >= radius * (1 - 1e-9):
                    continue
                m = margin_at(x, b, b_a, ngap)
                if m is not None and m > 1e-10 and m > worst_margin:
                    worst_margin = m
                    worst = (tuple(b), tuple(b_a), tuple(x))
    if worst is not None:
        return CheckResult(False, certified=True, samples=qualified, witness=worst)
    return CheckResult(True, certified=False, samples=qualified, vacuous=qualified == 0)


def eps_delta_subregularity_modulus(set_a: SetSpec, a_prime: SetSpec | None,
                                    companion: SetSpec, xbar, delta: float,
                                    budget: int = 512, seed: int = 0) -> Estimate:
    """Empirical sup of <v, b-a> / (||v|| ||b-a||) over restricted proximal normals.

    a_prime=None recovers plain (eps, delta)-subregularity; companion = set_a
    recovers the (A', eps, delta)-regularity variant.
    """
    xbar = np.asarray(xbar, dtype=float)
    n_base = max(min(budget // 8, 64), 8)
    # Multi-scale base points: the sup is a limsup-type quantity, so bases
    # accumulating at xbar matter.
    scales = [delta, delta / 8, delta / 64]
    per = [n_base - 2 * (n_base // 3), n_base // 3, n_base // 3]
    chunks = [set_a.sample_near(xbar, s, c, seed + 17 * i)
              for i, (s, c) in enumerate(zip(scales, per)) if c > 0]
    chunks = [c for c in chunks if len(c)]
    bases = np.concatenate(chunks, axis=0) if chunks else np.zeros((0, xbar.shape[0]))
    if set_a.contains(xbar):
        bases = np.concatenate([np.asarray(xbar)[None, :], bases], axis=0)
    bs = companion.sample_near(xbar, delta, budget, seed + 1)
    if bs.shape[0] == 0 or bases.shape[0] == 0:
        return Estimate(None, "lower", 0, flag="insufficient-samples")
    best = 0.0
    witness = None
    used = 0
    for i, a in enumerate(bases):
        if a_prime is None:
            cone = proximal_normal_cone(set_a, a)
        else:
            cone = restricted_normal_cone(set_a, a_prime, a, kind="proximal",
                                          delta_sample=delta, budget=max(budget // 8, 64),
                                          seed=seed + 31 * i)
        dirs, _ = unit_directions(cone, budget=32, seed=seed)
        if dirs.shape[0] == 0:
            continue
        gaps = bs - a
        norms = np.linalg.norm(gaps, axis=1)
        keep = norms > _RATIO_EPS
        if not np.any(keep):
            continue
        ratios = (gaps[keep] @ dirs.T) / norms[keep, None]
        used += int(ratios.size)
        idx = np.unravel_index(np.argmax(ratios), ratios.shape)
        if float(ratios[idx]) > best:
            best = float(ratios[idx])
            witness = (tuple(a), tuple(dirs[idx[1]]), tuple(bs[keep][idx[0]]))
    if used == 0:
        return Estimate(0.0, "lower", 0, flag="vacuous")
    return Estimate(max(best, 0.0), "lower", used, witness=witness)


def clarke_regularity_check(set_a: SetSpec, xbar) -> CheckResult:
    """Limiting vs Frechet cone comparison; exact where closed forms exist."""
    lim = limiting_normal_cone(set_a, xbar)
    fre = frechet_normal_cone(set_a, xbar)
    equal, certified = cone_equal(lim, fre)
    return CheckResult(equal, certified=certified)


def super_regularity_delta(set_a: SetSpec, xbar, eps: float, budget: int = 512,
                           seed: int = 0, max_level: int = 20) -> Estimate:
    """Largest delta from the geometric schedule 2^-k passing the normal-chord test."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    xbar = np.asarray(xbar, dtype=float)
    last_witness = None
    for k in range(max_level + 1):
        delta = 2.0 ** (-k)
        pts = set_a.sample_near(xbar, delta, budget, seed + k)
        if set_a.contains(xbar):
            pts = np.concatenate([xbar[None, :], pts], axis=0)
        if pts.shape[0] == 0:
            continue
        witness = None
        n_base = min(len(pts), 48)
        for a in pts[:n_base]:
            dirs, _ = unit_directions(limiting_normal_cone(set_a, a), budget=16, seed=seed)
            if dirs.shape[0] == 0:
                continue
            gaps = pts - a
            norms = np.linalg.norm(gaps, axis=1)
            keep = norms > _RATIO_EPS
            if not np.any(keep):
                continue
            ratios = (gaps[keep] @ dirs.T) / norms[keep, None]
            idx = np.unravel_index(np.argmax(ratios), ratios.shape)
            if float(ratios[idx]) > eps + 1e-9:
                witness = (tuple(a), tuple(dirs[idx[1]]), tuple(pts[keep][idx[0]]))
                break
        if witness is None:
            return Estimate(delta, "upper", budget)
        last_witness = witness
    return Estimate(None, "upper", budget, flag="failed", witness=last_witness)


def prox_regularity_check(set_a: SetSpec, xbar, eps_bar: float, delta_bar: float,
                          budget: int = 512, seed: int = 0) -> CheckResult:
    """Quadratic normal inequality <v, x-a> <= (eps/2)||x-a||^2 on samples.

    Normals are tested at the extreme length delta_bar; the inequality is
    linear in ||v|| so that is the binding case.
    """
    if eps_bar <= 0 or delta_bar <= 0:
        raise ValueError("prox-regularity constants must be positive")
    xbar = np.asarray(xbar, dtype=float)
    pts = set_a.sample_near(xbar, delta_bar, budget, seed)
    if set_a.contains(xbar):
        pts = np.concatenate([xbar[None, :], pts], axis=0)
    checked = 0
    n_base = min(len(pts), 48)
    for a in pts[:n_base]:
        dirs, _ = unit_directions(limiting_normal_cone(set_a, a), budget=16, seed=seed)
        if dirs.shape[0] == 0:
            continue
        gaps = pts - a
        sq = np.sum(gaps**2, axis=1)
        keep = sq > _RATIO_EPS**2
        if not np.any(keep):
            continue
        lhs = delta_bar * (gaps[keep] @ dirs.T)
        rhs = 0.5 * eps_bar * sq[keep, None]
        checked += int(lhs.size)
        bad = lhs > rhs + 1e-10
        if np.any(bad):
            i, j = np.argwhere(bad)[0]
            return CheckResult(False, certified=True, samples=checked,
                               witness=(tuple(a), tuple(delta_bar * dirs[j]), tuple(pts[keep][i])))
    return CheckResult(True, certified=False, samples=checked, vacuous=checked == 0)


# ---------------------------------------------------------------------------
# The classifier ladder
# ---------------------------------------------------------------------------

LADDER_ORDER = ["convex", "prox_regular", "super_regular", "clarke",
                "eps_delta_regular", "eps_delta_subregular", "holder"]


@dataclass
class ClassifyConfig:
    delta: float = 0.25
    budget: int = 384
    seed: int = 0
    sigma: float = 0.0
    super_eps: float = 0.25
    prox_eps: float = 4.0
    holder_c: float = 0.25
    companion: SetSpec | None = None  # None: singleton {xbar}
    verdict_margin: float | None = None  # None: 1.5 * budget^(-1/dim), grid-resolution honesty


@dataclass
class RegularityLadderReport:
    verdicts: dict
    moduli: dict
    details: dict
    inconsistencies: list = field(default_factory=list)

    def verdict(self, name: str) -> bool:
        return self.verdicts[name]

    def to_dict(self) -> dict:
        return {
            "verdicts": dict(self.verdicts),
            "moduli": {k: (v.to_dict() if isinstance(v, Estimate) else v) for k, v in self.moduli.items()},
            "inconsistencies": list(self.inconsistencies),
        }


def _structurally_convex(spec: SetSpec) -> bool:
    return bool(getattr(spec, "convex", False))


def classify(set_a: SetSpec, xbar, config: ClassifyConfig | None = None) -> RegularityLadderReport:
    """Run the full checker battery and report ladder-consistent verdicts."""
    cfg = config or ClassifyConfig()
    xbar = np.asarray(xbar, dtype=float)
    if not set_a.contains(xbar, 1e-7):
        raise ValueError("classification point does not belong to the set")
    companion = cfg.companion if cfg.companion is not None else singleton(xbar)

    convex = _structurally_convex(set_a)
    prox = prox_regularity_check(set_a, xbar, cfg.prox_eps, cfg.delta, cfg.budget, cfg.seed)
    sup = super_regularity_delta(set_a, xbar, cfg.super_eps, cfg.budget, cfg.seed)
    clarke = clarke_regularity_check(set_a, xbar)
    reg = eps_delta_subregularity_modulus(set_a, None, set_a, xbar, cfg.delta,
                                          cfg.budget, cfg.seed + 5)
    # The ladder entry is the at-xbar notion (companion {xbar}); a configured
    # companion set only drives the relative notions (Hoelder, elemental).
    subreg = eps_delta_subregularity_modulus(set_a, None, singleton(xbar), xbar, cfg.delta,
                                             cfg.budget, cfg.seed + 7)
    holder = holder_regularity_check(set_a, companion, xbar, cfg.sigma, cfg.holder_c,
                                     w_radius=cfg.delta, budget=cfg.budget, seed=cfg.seed + 9)

    # One representative elemental-subregularity modulus sweep over gph N.
    elem_best = Estimate(0.0, "lower", 0, flag="vacuous")
    bases = set_a.sample_near(xbar, cfg.delta, 16, cfg.seed + 11)
    if set_a.contains(xbar):
        bases = np.concatenate([xbar[None, :], bases], axis=0)
    for i, a in enumerate(bases[:12]):
        dirs, _ = unit_directions(limiting_normal_cone(set_a, a), budget=8, seed=cfg.seed)
        for v in dirs[:4]:
            est = elemental_subregularity_modulus(ElementalQuery(
                set_a, xbar, a, v, relative_to=companion, order=cfg.sigma,
                u_radius=cfg.delta, budget=max(cfg.budget // 8, 32), seed=cfg.seed + 13 * i))
            if est.value is not None and (elem_best.value is None or est.value > elem_best.value):
                elem_best = est

    margin = cfg.verdict_margin
    if margin is None:
        margin = float(np.clip(1.5 * cfg.budget ** (-1.0 / set_a.dim), 1e-6, 0.2))
    verdicts = {
        "convex": convex,
        "prox_regular": prox.passed,
        "super_regular": sup.value is not None,
        "clarke": clarke.passed,
        "eps_delta_regular": bool(reg.value is not None and reg.value < 1.0 - margin),
        "eps_delta_subregular": bool(subreg.value is not None and subreg.value < 1.0 - margin),
        "holder": holder.passed,
    }
    moduli = {
        "eps_delta_regular": reg,
        "eps_delta_subregular": subreg,
        "elemental_subregular": elem_best,
        "super_regular_delta": sup,
    }
    details = {"prox": prox, "clarke": clarke, "holder": holder}

    inconsistencies = []
    for hi, lo in zip(LADDER_ORDER, LADDER_ORDER[1:]):
        if verdicts[hi] and not verdicts[lo]:
            inconsistencies.append(f"{hi} certified but {lo} failed")
    return RegularityLadderReport(verdicts, moduli, details, inconsistencies)
