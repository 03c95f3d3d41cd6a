"""Transversality constants: metric/dual estimates against independent oracles."""

import numpy as np
import pytest

from regkit import fixtures as fx
from regkit import transversal as tv
from regkit.cones import Subspace, friedrichs_cosine
from regkit.sets import AffineSubspace, Ball

SQ2 = np.sqrt(2.0)
T2 = np.sqrt(2.0 - SQ2) / 2.0  # sin(pi/8)
T1 = np.sqrt(2.0 + SQ2) / 2.0  # cos(pi/8)


def sr_grid_oracle(set_a, set_b, n=100_000):
    """Minimize max(dA, dB)/||x|| over the unit circle by brute force."""
    phi = np.linspace(0, 2 * np.pi, n, endpoint=False)
    X = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    return float(np.min(np.maximum(set_a.distances(X), set_b.distances(X))))


@pytest.fixture(scope="module")
def e5():
    return fx.scenario_e5(budget=2048)


@pytest.fixture(scope="module")
def e3():
    return fx.scenario_e3(budget=1024)


@pytest.fixture(scope="module")
def ortho():
    return fx.scenario_orthogonal(budget=2048)


class TestMetricEstimates:
    def test_e5_sr_grid_oracle(self, e5):
        oracle = sr_grid_oracle(e5.set_a, e5.set_b)
        assert oracle == pytest.approx(T2, abs=1e-6)
        est = tv.sr_metric_estimate(e5)
        assert est.side == "upper"
        assert est.value == pytest.approx(oracle, abs=1e-2)

    def test_orthogonal_sr(self, ortho):
        oracle = sr_grid_oracle(ortho.set_a, ortho.set_b)
        assert oracle == pytest.approx(np.sin(np.pi / 4), abs=1e-6)
        assert tv.sr_metric_estimate(ortho).value == pytest.approx(oracle, abs=1e-2)

    def test_e3_sr_is_one(self, e3):
        assert tv.sr_metric_estimate(e3).value == pytest.approx(1.0, abs=1e-9)

    def test_e5_srr_closed_form(self, e5):
        # point-line distance: d((t,0), diag) = |t| sin(45 deg)
        est = tv.srr_estimate(e5)
        assert est.value == pytest.approx(np.sin(np.pi / 4), abs=1e-9)

    def test_e3_srr_degenerate(self, e3):
        assert tv.srr_estimate(e3).flag == "degenerate"

    def test_orthogonal_srr_one(self, ortho):
        assert tv.srr_estimate(ortho).value == pytest.approx(1.0, abs=1e-9)

    def test_sandwich(self, e5, ortho):
        for s in (e5, ortho):
            sr = tv.sr_metric_estimate(s).value
            srr = tv.srr_estimate(s).value
            assert srr / (srr + 2) - 1e-9 <= sr <= srr + 2e-2

    def test_interior_saturates(self):
        s = fx.scenario_interior()
        assert tv.sr_metric_estimate(s).flag == "saturated"


class TestPrimalOracle:
    def test_e3_alpha_boundary(self, e3):
        assert tv.primal_subtransversality_check(e3, 1.0).passed
        res = tv.primal_subtransversality_check(e3, 1.01)
        assert not res.passed and res.witness is not None

    def test_e5_alpha_boundary(self, e5):
        assert tv.primal_subtransversality_check(e5, 0.38).passed
        assert not tv.primal_subtransversality_check(e5, 0.40).passed

    def test_interior_any_alpha(self):
        s = fx.scenario_interior()
        for alpha in (0.5, 2.0, 10.0):
            assert tv.primal_subtransversality_check(s, alpha).passed


class TestTranslatedEstimate:
    def test_e5_r_metric(self, e5):
        est = tv.r_metric_estimate(e5)
        assert est.value == pytest.approx(T2, abs=1e-2)

    def test_e3_r_zero_via_certified_empty(self, e3):
        est = tv.r_metric_estimate(e3)
        assert est.value == 0.0
        assert est.witness[-1] == "empty-intersection"

    def test_interior_no_information(self):
        est = tv.r_metric_estimate(fx.scenario_interior())
        assert est.flag in ("no-information", "saturated")


class TestDualEstimates:
    def test_e5_full_table(self, e5):
        d = tv.dual_siblings(e5)
        assert d.r.side == "exact"
        assert d.r.value == pytest.approx(T2, abs=1e-12)
        assert d.rgd.value == pytest.approx(T1, abs=1e-12)
        assert d.rgdd.value == pytest.approx(SQ2 * T2, abs=1e-12)
        assert d.rga.value == pytest.approx(1 / SQ2, abs=1e-12)
        assert all(abs(v) < 1e-10 for v in d.residuals.values())

    def test_orthogonal_direct_evaluation_oracle(self, ortho):
        # oracle: the four unit normals are +/-e2 (for A) and +/-e1 (for B)
        na = [np.array([0.0, 1.0]), np.array([0.0, -1.0])]
        nb = [np.array([1.0, 0.0]), np.array([-1.0, 0.0])]
        r_oracle = 0.5 * min(np.linalg.norm(u + v) for u in na for v in nb)
        rgd_oracle = 0.5 * max(np.linalg.norm(u - v) for u in na for v in nb)
        rga_oracle = max(-(u @ v) for u in na for v in nb)
        d = tv.dual_siblings(ortho)
        assert d.r.value == pytest.approx(r_oracle, abs=1e-12)
        assert d.rgd.value == pytest.approx(rgd_oracle, abs=1e-12)
        assert d.rga.value == pytest.approx(rga_oracle, abs=1e-12)
        assert d.rgdd.value == pytest.approx(1.0, abs=1e-12)

    def test_r_dual_grid_oracle_orthogonal(self, ortho):
        # 1-d minimization over t in the ||v1||+||v2||=1 normalization
        t = np.linspace(0.01, 0.99, 9801)
        vals = np.sqrt(t**2 + (1 - t) ** 2)  # orthogonal unit pair
        assert float(np.min(vals)) == pytest.approx(1 / SQ2, abs=1e-6)
        est = tv.r_dual_estimate(ortho)
        assert est.value == pytest.approx(1 / SQ2, abs=1e-12)

    def test_e3_r_zero(self, e3):
        assert tv.r_dual_estimate(e3).value == 0.0

    def test_sampled_path_close(self, e5):
        d = tv.dual_siblings(e5, method="sampled", budget=100_000)
        assert d.r.value == pytest.approx(T2, abs=1e-2)
        assert d.rgdd.value == pytest.approx(SQ2 * T2, abs=1e-2)
        assert all(abs(v) < 1e-2 for v in d.residuals.values())

    def test_saturated_cones(self):
        d = tv.dual_siblings(fx.scenario_interior())
        assert d.r.flag == "saturated"


class TestConditionChecks:
    def test_e5_transversal(self, e5):
        res = tv.transversality_condition_check(e5)
        assert res.passed and res.certified

    def test_e3_not_transversal(self, e3):
        assert not tv.transversality_condition_check(e3).passed

    def test_cross_xaxis_not_transversal(self):
        s = fx.scenario_cross_xaxis()
        assert not tv.transversality_condition_check(s).passed

    def test_manifold_check_e5(self, e5):
        res, cos = tv.manifold_transversality_check(e5)
        assert res.passed
        assert cos == pytest.approx(1 / SQ2, abs=1e-12)
        assert res.detail["cos_tangent"] == pytest.approx(res.detail["cos_normal"], abs=1e-12)

    def test_manifold_check_e1_fails(self, e3):
        res, cos = tv.manifold_transversality_check(e3)
        assert not res.passed  # tangent sum is one-dimensional
        assert cos == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_planes_in_r3(self):
        a = AffineSubspace(np.array([[1.0, 0, 0], [0, 0, 1.0]]), np.zeros(3))
        b = AffineSubspace(np.array([[0.0, 1.0, 0], [0, 0, 1.0]]), np.zeros(3))
        inter = AffineSubspace(np.array([[0.0, 0, 1.0]]), np.zeros(3))
        s = tv.PairScenario("planes", a, b, np.zeros(3), inter, 0.5, 512, 3)
        res, cos = tv.manifold_transversality_check(s)
        assert res.passed
        assert cos == pytest.approx(0.0, abs=1e-12)

    def test_rga_equals_friedrichs_on_lines(self):
        for seed in (11, 12, 13):
            s = fx.random_line_pair(seed, budget=512)
            d = tv.dual_siblings(s)
            c = friedrichs_cosine(Subspace(s.set_a.basis), Subspace(s.set_b.basis))
            assert d.rga.value == pytest.approx(c, abs=1e-6)


class TestIntrinsic:
    def test_e5_pinned_value(self, e5):
        # grid oracle over both lines: parametrize tau = t/s, minimize
        tau = np.linspace(-4, 4, 400_001)
        f = np.maximum(np.abs(1 - tau), np.abs(2 - tau) / SQ2) / np.sqrt((1 - tau) ** 2 + 1)
        oracle = float(np.min(f))
        assert oracle == pytest.approx(T2, abs=1e-5)
        est = tv.intrinsic_transversality_estimate(e5)
        assert est.value == pytest.approx(oracle, abs=5e-3)

    def test_equal_sets_vacuous(self, e3):
        assert tv.intrinsic_transversality_estimate(e3).flag == "vacuous"

    def test_orthogonal_at_least_sin45(self, ortho):
        est = tv.intrinsic_transversality_estimate(ortho)
        assert est.value >= np.sin(np.pi / 4) - 1e-6

    def test_proximal_variant_agrees(self, e5):
        lim = tv.intrinsic_transversality_estimate(e5, kind="limiting")
        prox = tv.intrinsic_transversality_estimate(e5, kind="proximal")
        assert lim.value == pytest.approx(prox.value, abs=1e-9)


class TestD4Checkers:
    def test_e5_separable(self, e5):
        res = tv.separable_intersection_check(e5, 1 / SQ2 + 0.05)
        assert res.passed
        assert res.detail["sup_cos"] == pytest.approx(1 / SQ2, abs=1e-6)
        assert not tv.separable_intersection_check(e5, 1 / SQ2 - 0.05).passed

    def test_equal_sets_vacuous(self, e3):
        assert tv.separable_intersection_check(e3, 0.9).vacuous

    def test_e5_qualification_and_inherent(self, e5):
        qual = tv.ab_qualification_check(e5, 1 / SQ2 + 0.08)
        assert qual.passed
        assert qual.detail["sup_cos"] == pytest.approx(1 / SQ2, abs=1e-3)
        inher = tv.inherent_transversality_check(e5, 1 / SQ2 + 0.08)
        assert inher.passed
        assert inher.detail["sup_cos"] == pytest.approx(1 / SQ2, abs=1e-6)

    def test_e3_qualification_vacuous(self, e3):
        assert tv.ab_qualification_check(e3, 0.9).vacuous
        assert tv.inherent_transversality_check(e3, 0.9).vacuous

    def test_cross_xaxis_pinned(self):
        s = fx.scenario_cross_xaxis()
        assert tv.inherent_transversality_check(s, 0.9).vacuous
        assert tv.separable_intersection_check(s, 0.9).vacuous

    def test_dual_sufficient_e5(self, e5):
        res = tv.dual_subtransversality_sufficient_check(e5, 0.35)
        assert res.passed
        implied = res.detail["implied_sr_lower"]
        assert implied <= tv.sr_metric_estimate(e5).value + 2e-2

    def test_dual_sufficient_orthogonal(self, ortho):
        assert tv.dual_subtransversality_sufficient_check(ortho, 0.6).passed

    def test_dual_sufficient_equal_lines(self, e3):
        # Filtered normals on one side of a line share orientation, so the
        # minimal pairing norm is 1 and the check passes for alpha < 1
        # (consistent with sr = 1) and fails above it.
        res = tv.dual_subtransversality_sufficient_check(e3, 0.5)
        assert res.passed
        assert res.detail["min_norm"] == pytest.approx(1.0, abs=1e-9)
        assert not tv.dual_subtransversality_sufficient_check(e3, 1.5).passed

    def test_holder_pairing_e5(self, e5):
        res = tv.holder_pairing_check(e5, alpha=0.75, c=0.1)
        assert res.passed
        bound = res.detail["implied_sr_lower"]
        assert bound <= tv.sr_metric_estimate(e5).value + 2e-2

    def test_holder_pairing_rejects_bad_constants(self, e5):
        with pytest.raises(ValueError):
            tv.holder_pairing_check(e5, alpha=0.9, c=0.2)


class TestSvmView:
    def test_e3_g_constant_closed_form(self, e3):
        # oracle: d((x1,x2), diagonal of the line) = ||x1-x2||/sqrt(2)
        rep = tv.svm_view(e3)
        assert rep.sr_g.value == pytest.approx(SQ2, abs=1e-9)
        lo, hi = rep.f3mod_bounds
        assert lo == pytest.approx(1.0, abs=1e-6)
        assert hi == np.inf
        assert lo <= rep.sr_g.value <= hi
        assert not rep.strong_subtransversal  # intersection is a whole line

    def test_e5_f_matches_sr(self, e5):
        rep = tv.svm_view(e5)
        sr = tv.sr_metric_estimate(e5)
        assert abs(rep.sr_f.value - sr.value) < 2e-2
        assert rep.strong_subtransversal  # isolated intersection point

    def test_e5_r_f_matches_r(self, e5):
        rep = tv.svm_view(e5)
        assert rep.r_f.value == pytest.approx(T2, abs=2e-2)


class TestChip:
    def test_e5_two_normal_lines_span_plane(self, e5):
        # oracle: vertical + anti-diagonal lines span R^2 (lstsq residual 0)
        gens = np.array([[0.0, 1.0], [1.0, -1.0]])
        for v in (np.array([1.0, 0.0]), np.array([0.3, 0.7])):
            coef, res, *_ = np.linalg.lstsq(gens.T, v, rcond=None)
            assert np.linalg.norm(gens.T @ coef - v) < 1e-12
        assert tv.chip_inclusion_check(e5).passed

    def test_e1_inclusion_holds_without_transversality(self, e3):
        assert tv.chip_inclusion_check(e3).passed

    def test_halfspace_vertex_polyhedral(self):
        s = fx.scenario_halfspaces_vertex()
        assert tv.chip_inclusion_check(s).passed


class TestAudit:
    @pytest.mark.parametrize("maker", [fx.scenario_e5, fx.scenario_e3,
                                       fx.scenario_orthogonal, fx.scenario_interior,
                                       fx.scenario_cross_diag])
    def test_no_violations(self, maker):
        s = maker(budget=1024)
        entries = tv.implication_audit(s)
        failures = [e for e in entries if not e.passed]
        assert failures == []

    def test_saturation_coherent(self):
        entries = tv.implication_audit(fx.scenario_interior())
        assert any(e.name == "saturation-coherence" and e.passed for e in entries)


class TestScenarioValidation:
    def test_xbar_must_lie_in_sets(self):
        with pytest.raises(ValueError):
            tv.PairScenario("bad", Ball(np.zeros(2), 1.0), Ball(np.zeros(2), 1.0),
                            np.array([5.0, 0.0]), Ball(np.zeros(2), 1.0))

    def test_intersection_must_stay_inside(self):
        with pytest.raises(ValueError):
            tv.PairScenario("bad", fx.line_through([1.0, 0.0]), fx.line_through([0.0, 1.0]),
                            np.zeros(2), Ball(np.zeros(2), 1.0))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            tv.PairScenario("bad", fx.line_through([1.0, 0.0]), fx.line_through([0.0, 1.0, 0.0]),
                            np.zeros(2), fx.point_set([0.0, 0.0]))
