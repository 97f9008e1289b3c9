"""Tests for the analytic certifiers and the certify_instance dispatcher."""
import numpy as np
import pytest

from avecert.models.instances import GaveInstance
from avecert.models.schemas import ConditionId, Verdict
from avecert.services.certify import (
    any_certified,
    certify_instance,
    check_gavme_classic,
    check_gavme_spectral,
    check_interval_spectral,
    check_ngavme,
    check_sylvester_max,
    check_sylvester_min_corrected,
    check_sylvester_min_flawed,
    is_sound,
)
from avecert.services.reference_cases import GAVME_2X2, GAVME_3X3, NGAVME_3X3, SYLVESTER_SCALAR


def by_id(certs):
    return {c.condition_id: c for c in certs}


def test_spectral_condition_on_2x2():
    """rho(|A^-1 B|) certifies where the singular value conditions stall."""
    cert = check_gavme_spectral(GAVME_2X2.A, GAVME_2X2.B)

    assert cert.verdict == Verdict.CERTIFIED
    assert cert.witnesses["rho_abs_AinvB"] == pytest.approx(0.38826, abs=1e-4)
    assert cert.margin == pytest.approx(1 - cert.witnesses["rho_abs_AinvB"])


def test_classic_conditions_on_2x2():
    certs = by_id(check_gavme_classic(GAVME_2X2.A, GAVME_2X2.B))

    assert certs[ConditionId.CLASSIC_I].verdict == Verdict.NOT_CERTIFIED
    assert certs[ConditionId.CLASSIC_II].verdict == Verdict.NOT_CERTIFIED
    assert certs[ConditionId.CLASSIC_IV].verdict == Verdict.CERTIFIED
    assert certs[ConditionId.CLASSIC_I].witnesses["sigma_min_A"] == pytest.approx(2.1939, abs=1e-3)
    assert certs[ConditionId.CLASSIC_II].witnesses["sigma_max_B"] == pytest.approx(2.3354, abs=1e-3)


def test_threshold_exactly_one_is_not_certified():
    """rho(|A^-1||B|) = 1 on the 2x2 case sits inside the decision band."""
    cert = by_id(check_gavme_classic(GAVME_2X2.A, GAVME_2X2.B))[ConditionId.CLASSIC_III]

    assert cert.witnesses["rho_absAinv_absB"] == pytest.approx(1.0, abs=1e-9)
    assert cert.verdict == Verdict.NOT_CERTIFIED


def test_decision_tolerance_widens_band():
    cert = by_id(check_gavme_classic(GAVME_2X2.A, GAVME_2X2.B, decision_tol=0.7))[ConditionId.CLASSIC_IV]

    assert cert.margin > 0
    assert cert.verdict == Verdict.NOT_CERTIFIED
    assert "decision band" in cert.notes


def test_3x3_witnesses():
    spectral = check_gavme_spectral(GAVME_3X3.A, GAVME_3X3.B)
    classic = by_id(check_gavme_classic(GAVME_3X3.A, GAVME_3X3.B))

    assert spectral.witnesses["rho_abs_AinvB"] == pytest.approx(0.9091, abs=1e-4)
    assert classic[ConditionId.CLASSIC_III].verdict == Verdict.CERTIFIED
    assert classic[ConditionId.CLASSIC_IV].witnesses["sigma_max_AinvB"] == pytest.approx(1.0885, abs=1e-3)
    assert classic[ConditionId.CLASSIC_IV].verdict == Verdict.NOT_CERTIFIED


def test_singular_a_is_inapplicable():
    A = np.array([[1.0, 2.0], [2.0, 4.0]])
    assert check_gavme_spectral(A, np.eye(2)).verdict == Verdict.INAPPLICABLE

    certs = by_id(check_gavme_classic(A, np.eye(2)))
    assert certs[ConditionId.CLASSIC_III].verdict == Verdict.INAPPLICABLE
    assert certs[ConditionId.CLASSIC_IV].notes == "A is singular"
    assert certs[ConditionId.CLASSIC_I].verdict == Verdict.NOT_CERTIFIED


IDENTITY_C_PAIRS = [
    (ConditionId.NGAVME_I, ConditionId.CLASSIC_I),
    (ConditionId.NGAVME_II, ConditionId.CLASSIC_II),
    (ConditionId.NGAVME_III, ConditionId.CLASSIC_III),
    (ConditionId.NGAVME_IV, ConditionId.CLASSIC_IV),
]


def test_ngavme_with_identity_c_matches_gavme():
    ngavme = by_id(check_ngavme(GAVME_2X2.A, GAVME_2X2.B, np.eye(2)))
    classic = by_id(check_gavme_classic(GAVME_2X2.A, GAVME_2X2.B))
    spectral = check_gavme_spectral(GAVME_2X2.A, GAVME_2X2.B)

    assert ngavme[ConditionId.NGAVME_RHO].witnesses["rho_abs_CAinvB"] == pytest.approx(
        spectral.witnesses["rho_abs_AinvB"], abs=1e-12)
    assert ngavme[ConditionId.NGAVME_RHO].verdict == spectral.verdict
    assert ngavme[ConditionId.NGAVME_IV].witnesses["sigma_max_CAinvB"] == pytest.approx(
        classic[ConditionId.CLASSIC_IV].witnesses["sigma_max_AinvB"], abs=1e-12)
    assert ngavme[ConditionId.NGAVME_I].witnesses["sigma_min_ACinv"] == pytest.approx(
        classic[ConditionId.CLASSIC_I].witnesses["sigma_min_A"], abs=1e-12)
    for ngavme_id, gavme_id in IDENTITY_C_PAIRS:
        assert ngavme[ngavme_id].verdict == classic[gavme_id].verdict


def test_identity_c_collapse_on_random_instances():
    """With C = I every NGAVME witness equals its GAVME counterpart."""
    rng = np.random.default_rng(8)
    witness_pairs = [
        (ConditionId.NGAVME_RHO, "rho_abs_CAinvB", ConditionId.GAVME_SPECTRAL, "rho_abs_AinvB"),
        (ConditionId.NGAVME_III, "rho_absCAinv_absB", ConditionId.CLASSIC_III, "rho_absAinv_absB"),
        (ConditionId.NGAVME_IV, "sigma_max_CAinvB", ConditionId.CLASSIC_IV, "sigma_max_AinvB"),
    ]
    for _ in range(200):
        n = int(rng.integers(2, 5))
        A = rng.standard_normal((n, n)) + 2.0 * np.eye(n)
        B = rng.standard_normal((n, n))
        ngavme = by_id(check_ngavme(A, B, np.eye(n)))
        gavme = by_id(check_gavme_classic(A, B) + [check_gavme_spectral(A, B)])

        for ngavme_id, ngavme_key, gavme_id, gavme_key in witness_pairs:
            assert ngavme[ngavme_id].witnesses[ngavme_key] == pytest.approx(
                gavme[gavme_id].witnesses[gavme_key], abs=1e-12)
            assert ngavme[ngavme_id].verdict == gavme[gavme_id].verdict


def test_ngavme_3x3_witnesses():
    certs = by_id(check_ngavme(NGAVME_3X3.A, NGAVME_3X3.B, NGAVME_3X3.C))

    assert certs[ConditionId.NGAVME_IV].witnesses["sigma_max_CAinvB"] == pytest.approx(0.90873, abs=1e-3)
    assert certs[ConditionId.NGAVME_RHO].witnesses["rho_abs_CAinvB"] == pytest.approx(0.70285, abs=1e-3)
    assert certs[ConditionId.NGAVME_CORO].witnesses["sigma_min_BinvACinv"] == pytest.approx(1.1004, abs=1e-3)
    for cid in (ConditionId.NGAVME_IV, ConditionId.NGAVME_RHO, ConditionId.NGAVME_CORO):
        assert certs[cid].verdict == Verdict.CERTIFIED


def test_ngavme_singular_hypotheses():
    certs = by_id(check_ngavme(np.eye(2), np.zeros((2, 2)), np.zeros((2, 2))))

    assert certs[ConditionId.NGAVME_I].verdict == Verdict.INAPPLICABLE
    assert certs[ConditionId.NGAVME_CORO].verdict == Verdict.INAPPLICABLE
    assert certs[ConditionId.NGAVME_CORO].notes == "B and C singular"
    assert certs[ConditionId.NGAVME_RHO].verdict == Verdict.CERTIFIED


def test_sylvester_max_reduces_to_sigma_max_with_identity_factors():
    A, B = GAVME_2X2.A, GAVME_2X2.B
    cert = check_sylvester_max(A, B, np.eye(2), np.eye(2))
    classic = by_id(check_gavme_classic(A, B))

    assert cert.witnesses["product"] == pytest.approx(classic[ConditionId.CLASSIC_IV].witnesses["sigma_max_AinvB"], abs=1e-12)
    assert cert.witnesses["sigma_max_LKinv"] == pytest.approx(1.0, abs=1e-12)
    assert cert.verdict == Verdict.CERTIFIED


def test_flawed_sylvester_condition_never_certifies():
    inst = SYLVESTER_SCALAR
    flawed = check_sylvester_min_flawed(inst.A, inst.B, inst.K, inst.L)

    assert flawed.verdict == Verdict.UNSOUND_CONDITION_HOLDS
    assert flawed.witnesses["product"] == pytest.approx(2.0)
    assert "two solutions" in flawed.notes
    assert not is_sound(flawed)
    assert not any_certified([flawed])


def test_corrected_sylvester_condition_on_scalar_case():
    inst = SYLVESTER_SCALAR
    corrected = check_sylvester_min_corrected(inst.A, inst.B, inst.K, inst.L)

    assert corrected.witnesses["product"] == pytest.approx(0.5)
    assert corrected.verdict == Verdict.NOT_CERTIFIED


def test_sylvester_singular_factor():
    cert = check_sylvester_max(np.eye(2), np.eye(2), np.zeros((2, 2)), np.eye(2))
    assert cert.verdict == Verdict.INAPPLICABLE
    assert cert.notes == "K singular"


def test_interval_spectral_zero_b():
    cert = check_interval_spectral(np.eye(3), np.zeros((3, 3)))

    assert cert.verdict == Verdict.CERTIFIED
    assert cert.witnesses["vertex_max_rho"] == 0.0


def test_interval_spectral_vertex_failure():
    cert = check_interval_spectral(np.eye(1), 2 * np.eye(1))

    assert cert.verdict == Verdict.NOT_CERTIFIED
    assert cert.witnesses["vertex_max_rho"] == pytest.approx(2.0)
    assert "vertex" in cert.notes


def test_certify_gave_lists_every_condition():
    inst = GaveInstance(A=GAVME_2X2.A, B=GAVME_2X2.B, f=[1.0, 2.0])
    certs = certify_instance(inst)
    ids = [c.condition_id for c in certs]

    assert len(ids) == len(set(ids)) == 12
    assert ConditionId.DD_II in ids
    assert any_certified(certs)


def test_certify_ngavme_and_sylvester():
    ngavme_ids = {c.condition_id for c in certify_instance(NGAVME_3X3)}
    assert ConditionId.NGAVME_CORO in ngavme_ids
    assert ConditionId.NGAVME_DD_II in ngavme_ids
    assert len(ngavme_ids) == 14

    certs = certify_instance(SYLVESTER_SCALAR)
    assert [c.condition_id for c in certs] == [
        ConditionId.SYLVESTER_MAX,
        ConditionId.SYLVESTER_MIN_CORRECTED,
        ConditionId.SYLVESTER_MIN_FLAWED,
    ]
    assert not any_certified(certs)


def test_enumeration_overflow_becomes_inapplicable():
    """With m = 3 the lifted scans need 2^9 patterns, above a cap of 4."""
    certs = by_id(certify_instance(GAVME_3X3, enum_cap=4))

    assert certs[ConditionId.GAVME_SPECTRAL].verdict == Verdict.CERTIFIED
    for cid in (ConditionId.INTERVAL_SPECTRAL, ConditionId.W_I, ConditionId.W_IV, ConditionId.DD_I):
        assert certs[cid].verdict == Verdict.INAPPLICABLE
    assert "exceeds cap 4" in certs[ConditionId.W_I].notes
