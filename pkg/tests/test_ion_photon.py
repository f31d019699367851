import pytest

from conftest import R2, SIGMA_PLUS_SECTORS, random_state
from ionmzi.hilbert import HybridState, Path, label, norm_sq
from ionmzi.ion_photon import scatter_arm
from ionmzi.optics import beam_splitter


def test_resonant_photon_is_scattered():
    s = HybridState.basis(label("m+", photon="u+"))
    assert scatter_arm(s, 0, Path.UPPER) == HybridState.basis(label("S"))


def test_sigma_minus_scatters_off_m_minus():
    s = HybridState.basis(label("m-", photon="l-"))
    assert scatter_arm(s, 0, Path.LOWER) == HybridState.basis(label("S"))


@pytest.mark.parametrize(
    "lab, arm",
    [
        (label("m-", photon="l+"), Path.LOWER),  # mismatched polarization
        (label("m+", photon="l+"), Path.UPPER),  # photon in the other arm
        (label("g", photon="u+"), Path.UPPER),  # ground level is transparent
        (label("m+", "m-"), Path.UPPER),  # no photon
    ],
)
def test_transparent_cases(lab, arm):
    s = HybridState.basis(lab)
    assert scatter_arm(s, 0, arm) == s


def test_two_ions_in_both_arms():
    s = HybridState(2, {label("m+", "m+", photon="u+"): R2, label("m+", "m+", photon="l+"): 1j * R2})
    out = scatter_arm(scatter_arm(s, 0, Path.UPPER), 1, Path.LOWER)
    expected = HybridState(2, {label("S", "m+"): R2, label("m+", "S"): 1j * R2})
    assert out.max_abs_diff(expected) < 1e-15


def test_index_out_of_range():
    with pytest.raises(IndexError):
        scatter_arm(HybridState.basis(label("m+")), 1, Path.UPPER)


def test_isometry(rng):
    for _ in range(300):
        s = random_state(rng, 3, n_terms=8, sectors=SIGMA_PLUS_SECTORS)
        for ion in range(3):
            for arm in Path:
                assert norm_sq(scatter_arm(s, ion, arm)) == pytest.approx(1, abs=1e-12)


def test_idempotent(rng):
    for _ in range(100):
        s = random_state(rng, 2, n_terms=8)
        once = scatter_arm(s, 1, Path.LOWER)
        assert scatter_arm(once, 1, Path.LOWER) == once


def test_commutes_on_different_ions_and_arms(rng):
    for _ in range(100):
        s = random_state(rng, 3, n_terms=8)
        ab = scatter_arm(scatter_arm(s, 0, Path.UPPER), 2, Path.LOWER)
        ba = scatter_arm(scatter_arm(s, 2, Path.LOWER), 0, Path.UPPER)
        assert ab.max_abs_diff(ba) < 1e-15


def test_interferometer_sequence_matches_both_metastable_cases():
    # m+ m+: both arms absorb
    s = HybridState.basis(label("m+", "m+", photon="l+"))
    out = beam_splitter(scatter_arm(scatter_arm(beam_splitter(s), 0, Path.UPPER), 1, Path.LOWER))
    assert out.max_abs_diff(HybridState(2, {label("S", "m+"): R2, label("m+", "S"): 1j * R2})) < 1e-12
    # m- m-: nothing absorbs, photon leaves through the upper port
    s = HybridState.basis(label("m-", "m-", photon="l+"))
    out = beam_splitter(scatter_arm(scatter_arm(beam_splitter(s), 0, Path.UPPER), 1, Path.LOWER))
    assert out.max_abs_diff(HybridState.basis(label("m-", "m-", photon="u+"), 1j)) < 1e-12


def test_isometry_fails_for_mixed_polarization_on_one_ion():
    # both terms end up as "ion scattered, no photon"
    s = HybridState(1, {label("m+", photon="u+"): R2, label("m-", photon="u-"): R2})
    assert norm_sq(scatter_arm(s, 0, Path.UPPER)) == pytest.approx(2)
