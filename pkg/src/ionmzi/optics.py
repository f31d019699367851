"""Single-photon injection and the 50:50 beam splitter of the interferometer."""

from __future__ import annotations

import math

from .hilbert import BasisLabel, HybridState, Path, Photon, Pol

_R = 1 / math.sqrt(2)

# path amplitudes produced from each input path; reflection picks up a factor i
BS_TABLE = {
    Path.LOWER: ((Path.UPPER, _R), (Path.LOWER, 1j * _R)),
    Path.UPPER: ((Path.LOWER, _R), (Path.UPPER, 1j * _R)),
}


def inject_photon(state: HybridState, path: Path = Path.LOWER, pol: Pol = Pol.SIGMA_PLUS) -> HybridState:
    """Attach one photon entering on ``path`` to every term of a photon-free state."""
    photon = Photon(path, pol)

    def add(lab: BasisLabel):
        if lab.photon is not None:
            raise ValueError("interferometer already holds a photon; only one is supported")
        return ((lab.with_photon(photon), 1.0),)

    return state.apply(add)


def _split(lab: BasisLabel):
    if lab.photon is None:
        return ((lab, 1.0),)
    pol = lab.photon.pol
    return tuple((lab.with_photon(Photon(out, pol)), c) for out, c in BS_TABLE[lab.photon.path])


def beam_splitter(state: HybridState) -> HybridState:
    """Apply the beam splitter to the photon sector; polarization is untouched."""
    return state.apply(_split)
