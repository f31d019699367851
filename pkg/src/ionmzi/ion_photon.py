"""Absorption of an interferometer photon by an ion sitting in one arm.

A sigma+ photon is absorbed by an ion in ``m+`` and a sigma- photon by an ion
in ``m-``. The excited level decays at once to the ground level while
emitting a photon into free space, so the excited level never appears in a
state: the photon leaves the interferometer and the ion is marked as
ground + scattered. Ground-level ions and mismatched polarizations are
transparent.
"""

from __future__ import annotations

from .hilbert import SCATTERED, BasisLabel, HybridState, IonLevel, Path, Pol

SELECTION_RULE = {Pol.SIGMA_PLUS: IonLevel.M_PLUS, Pol.SIGMA_MINUS: IonLevel.M_MINUS}


def scatter_arm(state: HybridState, ion_index: int, arm: Path) -> HybridState:
    """Let ion ``ion_index``, placed in ``arm``, absorb a resonant photon.

    The map is norm-preserving on states in which that ion has not scattered
    yet and the photon has a definite polarization, which covers everything a
    single sigma+ pass through the interferometer produces. Outside that
    domain distinct terms can land on the same scattered label, because the
    free-space photon is only a flag.
    """
    if not 0 <= ion_index < state.ion_count:
        raise IndexError(f"ion {ion_index} out of range for {state.ion_count} ions")

    def hit(lab: BasisLabel):
        photon = lab.photon
        if (
            photon is not None
            and photon.path is arm
            and lab.ions[ion_index].level is SELECTION_RULE[photon.pol]
        ):
            return ((BasisLabel(lab.ions, None).with_ion(ion_index, SCATTERED), 1.0),)
        return ((lab, 1.0),)

    return state.apply(hit)
