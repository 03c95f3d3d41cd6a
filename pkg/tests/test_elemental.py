"""Elemental regularity moduli, checkers and the classifier ladder."""

import numpy as np
import pytest

from regkit import cones as ck
from regkit.elemental import (
    ClassifyConfig,
    ElementalQuery,
    LADDER_ORDER,
    classify,
    clarke_regularity_check,
    elemental_regularity_check,
    elemental_subregularity_modulus,
    eps_delta_subregularity_modulus,
    holder_regularity_check,
    prox_regularity_check,
    singleton,
    super_regularity_delta,
)
from regkit.sets import Ball, HalfSpace, UnionOfSets
from conftest import half_disk_pair, line_through_origin

SQ2 = np.sqrt(2.0)


class TestSubregularityModulus:
    def test_cross_all_graph_pairs_zero(self, cross):
        # every a in the cross is orthogonal to its limiting normals
        origin = singleton([0.0, 0.0])
        for a in ([0.0, 0.0], [0.5, 0.0], [0.0, -0.8]):
            dirs, _ = ck.unit_directions(ck.limiting_normal_cone(cross, a))
            for v in dirs:
                est = elemental_subregularity_modulus(ElementalQuery(
                    cross, np.zeros(2), np.asarray(a, float), v,
                    relative_to=origin, u_radius=5.0, budget=64))
                assert est.side == "lower"
                assert est.value == pytest.approx(0.0, abs=1e-12)

    def test_half_disk_relative_zero(self):
        A, B = half_disk_pair()
        a = np.array([0.25, 0.25])
        cone = ck.restricted_normal_cone(A, B, a, kind="proximal",
                                         delta_sample=0.4, budget=256, seed=3)
        assert cone.rays.shape[0] >= 1
        for v in cone.rays:
            est = elemental_subregularity_modulus(ElementalQuery(
                A, np.zeros(2), a, v, relative_to=B, u_radius=0.9, budget=256))
            assert est.value == pytest.approx(0.0, abs=1e-4)

    def test_convex_zero(self, unit_ball):
        a = np.array([1.0, 0.0])
        v = np.array([1.0, 0.0])
        est = elemental_subregularity_modulus(ElementalQuery(
            unit_ball, a, a, v, relative_to=None, u_radius=2.0, budget=512))
        assert est.value == pytest.approx(0.0, abs=1e-12)

    def test_insufficient_samples(self, unit_ball):
        far = singleton([10.0, 0.0])
        est = elemental_subregularity_modulus(ElementalQuery(
            unit_ball, np.array([1.0, 0.0]), np.array([1.0, 0.0]),
            np.array([1.0, 0.0]), relative_to=far, u_radius=0.5, budget=64))
        assert est.flag == "insufficient-samples"
        assert est.budget == 0


class TestElementalRegularity:
    def test_circle_true_with_delta_eq_eps(self, unit_circle):
        xbar = np.array([1.0, 0.0])
        for eps in (0.2, 0.4):
            res = elemental_regularity_check(unit_circle, xbar, xbar, np.array([1.0, 0.0]),
                                             sigma=0.0, eps=eps, u_radius=eps,
                                             v_radius=0.3, budget=256, seed=1)
            assert res.passed

    def test_cross_false_along_axis(self, cross):
        res = elemental_regularity_check(cross, np.zeros(2), np.zeros(2), np.array([1.0, 0.0]),
                                         sigma=0.0, eps=0.5, u_radius=1.0,
                                         v_radius=0.2, budget=256, seed=2)
        assert not res.passed
        u, b, _ = res.witness
        # witness family x = t v: set point aligned with the normal direction
        assert abs(np.dot(b, u) - np.linalg.norm(b) * np.linalg.norm(u)) < 1e-6

    def test_line_true_with_zero_eps(self, x_axis):
        res = elemental_regularity_check(x_axis, np.array([2.0, 0.0]), np.array([2.0, 0.0]),
                                         np.array([0.0, 1.0]), sigma=0.0, eps=0.0,
                                         u_radius=1.0, budget=128, seed=0)
        assert res.passed


class TestHolder:
    def test_convex_always_true(self, unit_ball, diag_line):
        res = holder_regularity_check(unit_ball, diag_line, np.array([1 / SQ2, 1 / SQ2]),
                                      sigma=0.0, c=0.5, w_radius=0.4, budget=128, seed=0)
        assert res.passed

    def test_cross_vs_diag_small_c_true(self, cross, diag_line):
        # offending point (0, 2t) is outside the ball for c < sqrt(2) - 1
        res = holder_regularity_check(cross, diag_line, np.zeros(2), sigma=0.0, c=0.1,
                                      w_radius=0.5, budget=128, seed=1)
        assert res.passed
        assert not res.vacuous

    def test_cross_vs_diag_mid_c_false(self, cross, diag_line):
        # for c in (sqrt(2)-1, 0.8) the point (0, 2t) offends:
        # ball: ||x-b|| = sqrt(2) t <= (1+c) t, angle: 2 t^2 > sqrt(c) t * t sqrt(5)
        res = holder_regularity_check(cross, diag_line, np.zeros(2), sigma=0.0, c=0.55,
                                      w_radius=0.5, budget=128, seed=1)
        assert not res.passed
        b, b_a, x = map(np.asarray, res.witness)
        t = b[0]
        assert np.allclose(b, [t, t], atol=1e-9)
        # witness is the opposite-branch point near (0, 2t) (either b_A branch)
        assert min(np.linalg.norm(x - [0, 2 * t]), np.linalg.norm(x - [2 * t, 0])) < 1e-3

    def test_half_disk_pair_true(self):
        A, B = half_disk_pair()
        res = holder_regularity_check(A, B, np.zeros(2), sigma=0.0, c=0.25,
                                      w_radius=0.4, budget=128, seed=2)
        assert res.passed


class TestEpsDeltaSubregularity:
    def test_convex_zero(self, unit_ball):
        est = eps_delta_subregularity_modulus(unit_ball, None, unit_ball,
                                              np.array([1.0, 0.0]), 0.3, budget=256)
        assert est.value == pytest.approx(0.0, abs=1e-12)

    def test_circle_matches_grid_oracle(self, unit_circle):
        delta = 0.1
        xbar = np.array([1.0, 0.0])
        # oracle: dense angular grid over a, b in the arc, v = +/- radial at a
        phi = np.linspace(-delta * 1.2, delta * 1.2, 2001)
        pts = np.stack([np.cos(phi), np.sin(phi)], 1)
        pts = pts[np.linalg.norm(pts - xbar, axis=1) < delta]
        best = 0.0
        for a in pts[:: max(len(pts) // 120, 1)]:
            gaps = pts - a
            norms = np.linalg.norm(gaps, axis=1)
            keep = norms > 1e-12
            for v in (a, -a):
                best = max(best, float(np.max((gaps[keep] @ v) / norms[keep])))
        est = eps_delta_subregularity_modulus(unit_circle, None, unit_circle, xbar,
                                              delta, budget=512, seed=4)
        assert est.value == pytest.approx(best, abs=2e-2)
        assert est.value <= delta + 2e-2  # chord bound: sup ratio ~ max chord / 2

    def test_cross_at_origin_singleton_zero(self, cross):
        est = eps_delta_subregularity_modulus(cross, None, singleton([0.0, 0.0]),
                                              np.zeros(2), 0.5, budget=256)
        assert est.value == pytest.approx(0.0, abs=1e-12)


class TestClarke:
    def test_cross_not_clarke(self, cross):
        res = clarke_regularity_check(cross, [0.0, 0.0])
        assert not res.passed and res.certified

    def test_circle_clarke(self, unit_circle):
        res = clarke_regularity_check(unit_circle, [0.0, 1.0])
        assert res.passed and res.certified

    def test_polyhedron_clarke(self, quadrant):
        res = clarke_regularity_check(quadrant, [0.0, 0.0])
        assert res.passed and res.certified


class TestSuperRegularity:
    def test_convex_accepts_first_level(self, unit_ball):
        est = super_regularity_delta(unit_ball, [1.0, 0.0], eps=0.1, budget=128, seed=0)
        assert est.value == pytest.approx(1.0)

    def test_circle_delta_scales_with_eps(self, unit_circle):
        d_small = super_regularity_delta(unit_circle, [1.0, 0.0], eps=0.05, budget=192, seed=1)
        d_big = super_regularity_delta(unit_circle, [1.0, 0.0], eps=0.4, budget=192, seed=1)
        assert d_small.value is not None and d_big.value is not None
        assert d_small.value <= d_big.value
        # prox-regular scaling: delta roughly linear in eps (within the 2^-k grid)
        assert d_big.value / d_small.value >= 2.0

    def test_cross_fails_with_witness(self, cross):
        est = super_regularity_delta(cross, [0.0, 0.0], eps=0.5, budget=192, seed=2)
        assert est.flag == "failed"
        a, v, x = map(np.asarray, est.witness)
        # witness pairs a set point against a normal from the other branch
        assert abs(np.dot(v, x - a)) > 0.5 * np.linalg.norm(x - a)


class TestProxRegularity:
    def test_circle_true_and_grid_oracle(self, unit_circle):
        res = prox_regularity_check(unit_circle, [1.0, 0.0], eps_bar=2.0, delta_bar=0.5,
                                    budget=256, seed=0)
        assert res.passed
        # oracle: on the unit circle <delta*(-a), x-a> = delta*||x-a||^2/2 exactly
        th = np.linspace(-0.5, 0.5, 1001)
        a = np.array([1.0, 0.0])
        X = np.stack([np.cos(th), np.sin(th)], 1)
        lhs = 0.5 * (X - a) @ (-a)
        rhs = 0.5 * 2.0 / 2 * np.sum((X - a) ** 2, axis=1)
        assert np.all(lhs <= rhs + 1e-12)

    def test_convex_true(self, left_halfplane):
        res = prox_regularity_check(left_halfplane, [0.0, 0.0], eps_bar=0.5, delta_bar=0.5,
                                    budget=128, seed=0)
        assert res.passed

    def test_cross_false(self, cross):
        res = prox_regularity_check(cross, [0.0, 0.0], eps_bar=4.0, delta_bar=0.5,
                                    budget=256, seed=1)
        assert not res.passed and res.witness is not None


class TestClassify:
    def test_circle_ladder(self, unit_circle):
        rep = classify(unit_circle, [1.0, 0.0], ClassifyConfig(seed=3))
        assert not rep.verdict("convex")
        for name in ("prox_regular", "super_regular", "clarke",
                     "eps_delta_regular", "eps_delta_subregular", "holder"):
            assert rep.verdict(name), name
        assert rep.inconsistencies == []

    def test_cross_at_origin(self, cross):
        rep = classify(cross, [0.0, 0.0], ClassifyConfig(seed=3))
        for name in ("convex", "prox_regular", "super_regular", "clarke", "eps_delta_regular"):
            assert not rep.verdict(name), name
        assert rep.verdict("eps_delta_subregular")
        assert rep.moduli["elemental_subregular"].value == pytest.approx(0.0, abs=1e-9)
        assert rep.inconsistencies == []

    def test_cross_off_origin_locally_convex(self, cross):
        rep = classify(cross, [1.0, 0.0], ClassifyConfig(delta=0.25, seed=5))
        for name in LADDER_ORDER[1:]:
            assert rep.verdict(name), name
        assert rep.moduli["eps_delta_regular"].value == pytest.approx(0.0, abs=1e-9)
        assert rep.moduli["elemental_subregular"].value == pytest.approx(0.0, abs=1e-9)
        assert rep.inconsistencies == []

    def test_halfplane_all_true(self, left_halfplane):
        rep = classify(left_halfplane, [0.0, 0.5], ClassifyConfig(seed=1))
        for name in LADDER_ORDER:
            assert rep.verdict(name), name
        assert rep.moduli["eps_delta_regular"].value == pytest.approx(0.0, abs=1e-12)
        assert rep.inconsistencies == []

    def test_half_disk_pair_ladder(self):
        A, B = half_disk_pair()
        rep = classify(A, [0.0, 0.0], ClassifyConfig(seed=2, companion=B))
        assert not rep.verdict("clarke")
        assert rep.verdict("eps_delta_subregular")
        assert rep.inconsistencies == []


class TestSigmaMonotonicity:
    def test_ratio_monotone_in_sigma(self):
        # With ||w|| <= 1 the denominator shrinks as sigma grows, so the
        # order-sigma ratio (and hence the modulus) is nondecreasing in sigma;
        # the direction reverses when ||w|| >= 1.
        rng = np.random.default_rng(0)
        for _ in range(200):
            w = rng.normal(size=3)
            w = w / np.linalg.norm(w) * rng.uniform(0.05, 1.0)
            gap = rng.normal(size=3)
            num = abs(float(w @ gap))
            r0 = num / (np.linalg.norm(w) ** 1.0 * np.linalg.norm(gap))
            r5 = num / (np.linalg.norm(w) ** 1.5 * np.linalg.norm(gap))
            assert r5 >= r0 - 1e-12
            w_big = w / np.linalg.norm(w) * rng.uniform(1.0, 3.0)
            num = abs(float(w_big @ gap))
            r0 = num / (np.linalg.norm(w_big) ** 1.0 * np.linalg.norm(gap))
            r5 = num / (np.linalg.norm(w_big) ** 1.5 * np.linalg.norm(gap))
            assert r5 <= r0 + 1e-12
