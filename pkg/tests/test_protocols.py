import math

import pytest

from conftest import R2, random_pair
from ionmzi.hilbert import Factor, HybridState, compose, fidelity_mod_phase, label, norm_sq, project
from ionmzi.protocols import (
    FOUR_ION_GHZ_LIKE,
    ConsistencyError,
    NormalizationError,
    ProtocolReport,
    check_report,
    concentrate_via_swapping,
    herald,
    remote_prepare,
    rsp_target_coefficients,
    run_mzi,
    swapping_front_end,
    teleport,
)
from reference_states import (
    product_evolutions,
    swapping_after_mzi,
    swapping_heralded,
    teleport_after_mzi,
    teleport_heralded,
)


@pytest.mark.parametrize("levels", [("m+", "m+"), ("m+", "m-"), ("m-", "m+"), ("m-", "m-")])
def test_run_mzi_product_states(levels):
    out = run_mzi(HybridState.basis(label(*levels)), 0, 1)
    assert out.max_abs_diff(product_evolutions()[levels]) < 1e-12
    assert norm_sq(out) == pytest.approx(1, abs=1e-12)


def test_run_mzi_teleport_input():
    alpha, beta = 0.6, 0.8
    s = compose([Factor((0,), {"m+": alpha, "m-": beta}), Factor((1, 2), {("m+", "m+"): R2, ("m-", "m-"): R2})])
    out = run_mzi(s, 0, 1)
    assert out.max_abs_diff(teleport_after_mzi(alpha, beta)) < 1e-12
    p, branch = project(out, lambda lab: lab.photon is not None and lab.photon.path.value == "l")
    assert p == pytest.approx(1 / 8, abs=1e-12)
    stripped = HybridState(3, {lab.with_photon(None): amp for lab, amp in branch})
    assert stripped.max_abs_diff(teleport_heralded(alpha, beta)) < 1e-12


def test_run_mzi_rejects_photon_already_present():
    with pytest.raises(ValueError):
        run_mzi(HybridState.basis(label("m+", "m+", photon="u+")), 0, 1)


@pytest.mark.parametrize("alpha, beta", [(1, 0), (0, 1), (0.6, 0.8), (R2, -R2 * 1j)])
def test_teleport(alpha, beta):
    r = teleport(alpha, beta)
    check_report(r)
    assert r.herald_probability == pytest.approx(1 / 8, abs=1e-12)
    assert r.total_success_probability == pytest.approx(1 / 8, abs=1e-12)
    for o in r.outcomes:
        assert o.success
        assert o.fidelity_vs_target == pytest.approx(1, abs=1e-9)
        assert o.absolute_probability == pytest.approx(1 / 32, abs=1e-12)
    assert [c.op for c in r.outcome("++").correction] == ["Y"]
    assert [c.op for c in r.outcome("+-").correction] == ["X"]
    assert r.herald_probability + sum(r.failure_mass.values()) == pytest.approx(1, abs=1e-12)


def test_teleport_herald_independent_of_input(rng):
    for _ in range(100):
        r = teleport(*random_pair(rng))
        assert abs(r.herald_probability - 1 / 8) < 1e-12


def test_teleport_normalization_policy():
    with pytest.raises(NormalizationError):
        teleport(0.5, 0.5)
    r = teleport(0.5, 0.5, normalize=True)
    assert r.herald_probability == pytest.approx(1 / 8)
    assert any("rescaled" in n for n in r.notes)
    assert r.inputs["alpha"] == 0.5


def test_teleport_ion3_received_state():
    alpha, beta = 0.6, 0.8
    r = teleport(alpha, beta)
    assert r.target_ions == (2,)
    assert r.target_state == HybridState(1, {label("m+"): alpha, label("m-"): beta})


def test_swapping_front_end_matches_reference():
    alpha, beta = random_pair(__import__("numpy").random.default_rng(5))
    a, b = 0.8, 0.6
    out = swapping_front_end(alpha, beta, a, b)
    assert out.max_abs_diff(swapping_after_mzi(alpha, beta, a, b)) < 1e-12
    p, branch, _ = herald(out)
    assert p == pytest.approx((abs(alpha * b) ** 2 + abs(beta * a) ** 2) / 4, abs=1e-12)
    assert fidelity_mod_phase(branch, swapping_heralded(alpha, beta, a, b)) == pytest.approx(1, abs=1e-12)


def test_concentration_matched():
    a, b = math.sqrt(0.7), math.sqrt(0.3)
    r = concentrate_via_swapping(a, b, a, b)
    check_report(r)
    assert r.total_success_probability == pytest.approx(0.105, abs=1e-12)
    assert r.herald_probability == pytest.approx(0.5 * 0.7 * 0.3, abs=1e-12)
    assert all(o.success for o in r.outcomes)
    _, heralded, _ = herald(swapping_front_end(a, b, a, b))
    assert fidelity_mod_phase(heralded, FOUR_ION_GHZ_LIKE) == pytest.approx(1, abs=1e-12)


def test_concentration_bell_states_per_outcome():
    a, b = math.sqrt(0.7), math.sqrt(0.3)
    r = concentrate_via_swapping(a, b, a, b)
    plus = {"m+": R2, "m-": R2}
    minus = {"m+": -R2, "m-": R2}
    singlet = Factor((0, 3), {("m-", "m+"): R2, ("m+", "m-"): -R2})
    triplet = Factor((0, 3), {("m-", "m+"): R2, ("m+", "m-"): R2})
    cases = {"++": (plus, plus, singlet), "--": (minus, minus, singlet), "+-": (plus, minus, triplet), "-+": (minus, plus, triplet)}
    for lab, (s2, s3, pair) in cases.items():
        expected = compose([Factor((1,), s2), Factor((2,), s3), pair])
        assert fidelity_mod_phase(r.outcome(lab).state, expected) == pytest.approx(1, abs=1e-12)


def test_concentration_product_channel_has_no_herald():
    r = concentrate_via_swapping(1, 0, 1, 0)
    check_report(r)
    assert r.herald_probability == 0
    assert r.total_success_probability == 0
    assert all(o.fidelity_vs_target is None for o in r.outcomes)


def test_concentration_unmatched():
    alpha, beta, a, b = 0.6, 0.8, math.sqrt(0.9), math.sqrt(0.1)
    r = concentrate_via_swapping(alpha, beta, a, b)
    check_report(r)
    assert r.herald_probability == pytest.approx(((alpha * b) ** 2 + (beta * a) ** 2) / 4, abs=1e-12)
    assert r.total_success_probability == 0
    assert any("not matched" in n for n in r.notes)


@pytest.mark.parametrize("a2", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
def test_concentration_success_formula(a2):
    a, b = math.sqrt(a2), math.sqrt(1 - a2)
    r = concentrate_via_swapping(a, b, a, b)
    assert abs(r.total_success_probability - 0.5 * a2 * (1 - a2)) < 1e-12


def test_rsp_symmetric_point():
    r = remote_prepare(R2, R2, R2, R2)
    check_report(r)
    assert rsp_target_coefficients(R2, R2) == pytest.approx((R2, R2))
    assert r.total_success_probability == pytest.approx(1 / 16, abs=1e-12)


def test_rsp_degenerate_basis():
    a, b = math.sqrt(0.7), math.sqrt(0.3)
    r = remote_prepare(a, b, 0, 1)
    check_report(r)
    assert rsp_target_coefficients(0, 1) == (1, 0)
    assert r.outcome("++").absolute_probability == 0
    assert r.outcome("--").absolute_probability == 0
    assert r.target_state == HybridState(2, {label("m+", "m-"): 1})


def test_rsp_generic_outcomes():
    a, b = math.sqrt(0.7), math.sqrt(0.3)
    mu, nu = math.sqrt(0.3), math.sqrt(0.7)
    r = remote_prepare(a, b, mu, nu)
    check_report(r)
    for lab in ("+-", "-+"):
        assert r.outcome(lab).success
        assert r.outcome(lab).fidelity_vs_target == pytest.approx(1, abs=1e-9)
    assert [(c.ion, c.op) for c in r.outcome("-+").correction] == [(0, "X"), (3, "X")]
    ab2 = 0.7 * 0.3
    assert r.outcome("++").absolute_probability == pytest.approx(0.5 * 0.3 * 0.7 * ab2, abs=1e-12)
    assert r.outcome("+-").absolute_probability == pytest.approx(0.25 * ab2 * (0.3**2 + 0.7**2), abs=1e-12)
    assert not r.outcome("++").success and not r.outcome("--").success


def test_rsp_minus_plus_before_correction():
    a, b = math.sqrt(0.7), math.sqrt(0.3)
    mu, nu = math.sqrt(0.3), math.sqrt(0.7)
    _, heralded, _ = herald(swapping_front_end(a, b, a, b))
    from ionmzi.measurement import IonBasis, measure_ion_pair

    rec = measure_ion_pair(heralded, (1, 2), IonBasis(nu, mu))["-+"]
    basis = IonBasis(nu, mu)
    m2, p3 = basis.vector("-"), basis.vector("+")
    expected = compose(
        [
            Factor((1,), {"m+": m2[0], "m-": m2[1]}),
            Factor((2,), {"m+": p3[0], "m-": p3[1]}),
            Factor((0, 3), {("m+", "m-"): mu**2, ("m-", "m+"): nu**2}),
        ],
        allow_unnormalized=True,
    )
    assert fidelity_mod_phase(rec.state, expected) == pytest.approx(1, abs=1e-12)


def test_rsp_rejects_unnormalized_basis():
    with pytest.raises(NormalizationError):
        remote_prepare(R2, R2, 0.5, 0.5)


def test_check_report_catches_broken_budget():
    r = teleport(0.6, 0.8)
    bad = ProtocolReport(**{**r.__dict__, "failure_mass": {"photon_upper": 0.0, "no_photon": 0.0}})
    with pytest.raises(ConsistencyError):
        check_report(bad)
