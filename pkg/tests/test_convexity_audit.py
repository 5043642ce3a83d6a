import json
import math

import numpy as np
import pytest

from audit import (
    ConvexityQuantities,
    AuditReport,
    ClaimVerdict,
    audit_en_bound,
    audit_first_determinant,
    audit_g_root,
    audit_I1_shape,
    audit_second_determinant,
    e_crossing_distance,
    find_g_root,
    find_vertex_root,
    g_function,
    run_audit,
    sample_instances,
)
from audit.closed_forms import vertex_function
from audit.verifier import E_BOUND, reference_radio
from utils.error_handling import DomainError


def _by_id(verdicts):
    return {v.claim_id: v for v in verdicts}


class TestClosedForms:
    def test_g_root(self):
        root = find_g_root()
        assert root == pytest.approx(41.4125, abs=1e-3)
        assert abs(g_function(root)) < 1e-4
        assert g_function(root - 0.1) > 0 > g_function(root + 0.1)

    def test_g_vanishes_at_one(self):
        assert g_function(1.0) == 0.0
        assert np.all(g_function(np.linspace(1.5, 41.0, 50)) > 0)

    def test_vertex_below_two_at_small_e(self):
        assert vertex_function(2.0) < 2.0

    def test_g_needs_positive_argument(self):
        with pytest.raises(DomainError):
            g_function(0.0)

    def test_vertex_root(self):
        assert find_vertex_root() == pytest.approx(2940.74, abs=1.0)

    def test_closed_form_second_derivative(self):
        radio = reference_radio()
        q = ConvexityQuantities.evaluate(radio, [3.0, 15.0, -20.0], [4.0, 0.0, 7.0], 20.0, 1e-3, 10e9, 5e12)
        assert np.allclose(q.d2B_dx2_closed, q.d2B_dx2, rtol=1e-9)
        assert np.allclose(q.G1, np.linalg.det(q.hessian), rtol=1e-9)
        assert np.all(q.e > 1.0)

    def test_samples_stay_inside_bound(self):
        radio = reference_radio()
        batch = sample_instances(500, np.random.default_rng(4), radio)
        q = batch.quantities(radio)
        assert q.e.shape == (500,)
        assert np.all((q.e > 1.0) & (q.e < E_BOUND))
        assert batch.head(10).p.shape == (10,)


class TestReferenceBound:
    def test_computed_maximum_exceeds_bound(self):
        verdicts = _by_id(audit_en_bound())
        assert verdicts["en_bound.decreasing_in_distance"].passed

        bound = verdicts["en_bound.max_below_24"]
        assert not bound.asserted
        assert not bound.passed
        assert bound.values["computed_max_e"] == pytest.approx(24.894, abs=1e-3)
        assert bound.values["reference_max_e"] == 23.781
        assert 10.1 < bound.values["distance_e_equals_24_m"] < 10.3

    def test_crossing_distance(self):
        radio = reference_radio(a=0.005)
        assert 10.1 < e_crossing_distance(radio, 1e-3, 10e9, 24.0) < 10.3
        assert math.isnan(e_crossing_distance(radio, 1e-3, 10e9, 100.0))


class TestVerdicts:
    def test_margins(self):
        verdict = ClaimVerdict.from_margins("x", "demo", [0.5, -0.25, 1.0, np.nan])
        assert verdict.samples == 4
        assert verdict.violations == 2
        assert verdict.worst_margin == -0.25
        assert not verdict.passed

    def test_report_only_claims_do_not_fail(self):
        report = AuditReport(
            verdicts=[
                ClaimVerdict.from_margins("a", "asserted", [1.0]),
                ClaimVerdict.from_margins("b", "note", [-1.0], asserted=False),
            ]
        )
        assert report.overall_pass
        assert "NOTE" in report.summary()
        assert report.verdict("b").violations == 1
        with pytest.raises(KeyError):
            report.verdict("c")

    def test_asserted_failure(self):
        report = AuditReport(verdicts=[ClaimVerdict.from_margins("a", "asserted", [-1.0])])
        assert not report.overall_pass
        assert report.to_dict()["overall_pass"] is False


class TestAudit:
    def test_determinant_audits(self):
        first = _by_id(audit_first_determinant(samples=300, rng_seed=5))
        second = _by_id(audit_second_determinant(samples=300, rng_seed=6))
        assert first["first_determinant.I_positive"].passed
        assert first["first_determinant.d2B_dx2_positive"].samples == 300
        assert all(v.passed for v in second.values() if v.asserted)
        assert all(v.passed for v in first.values() if v.asserted)

    def test_case2_comparison_is_report_only(self):
        first = _by_id(audit_first_determinant(samples=300, rng_seed=5))
        case2 = first["first_determinant.case2_z_star_min_exceeds_z_max"]
        assert not case2.asserted
        assert "e^{ad}" in case2.description
        assert first["first_determinant.I_positive"].passed

    def test_g_and_vertex_claims(self):
        assert all(v.passed for v in audit_g_root())
        assert all(v.passed for v in audit_I1_shape(samples=200))

    def test_small_audit_passes(self):
        report = run_audit(samples=500, seed=0)
        failed = [v.claim_id for v in report.verdicts if v.asserted and not v.passed]
        assert failed == []
        assert report.overall_pass
        assert report.verdict("first_determinant.I_positive").samples == 500
        assert report.verdict("second_determinant.hessian_psd").passed

    def test_audit_is_deterministic(self):
        first = json.dumps(run_audit(samples=200, seed=3).to_dict(), sort_keys=True)
        second = json.dumps(run_audit(samples=200, seed=3).to_dict(), sort_keys=True)
        assert first == second

    @pytest.mark.slow
    def test_full_audit_passes(self):
        assert run_audit(samples=10000, seed=0).overall_pass
