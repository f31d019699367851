"""Port detection, single-ion projective measurements and Pauli corrections."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .hilbert import (
    M_MINUS,
    M_PLUS,
    NORM_TOL,
    BasisLabel,
    HybridState,
    IonLevel,
    Path,
    norm_sq,
    project,
)


class OutsideQubitSubspace(ValueError):
    """A qubit operation touched an ion that is in the ground level."""


@dataclass(frozen=True)
class IonBasis:
    """Measurement basis ``|+'> = nu|m+> + mu|m->``, ``|-'> = -conj(mu)|m+> + conj(nu)|m->``.

    For real ``nu, mu`` this is the textbook rotated basis; the conjugates
    keep the pair orthonormal when the coefficients are complex.
    """

    nu: complex
    mu: complex

    def __post_init__(self):
        object.__setattr__(self, "nu", complex(self.nu))
        object.__setattr__(self, "mu", complex(self.mu))
        if abs(abs(self.nu) ** 2 + abs(self.mu) ** 2 - 1) > NORM_TOL:
            raise ValueError(f"|nu|^2 + |mu|^2 must be 1, got {abs(self.nu) ** 2 + abs(self.mu) ** 2!r}")

    def vector(self, sign: str) -> tuple[complex, complex]:
        """Ket coefficients on ``(m+, m-)`` for outcome ``'+'`` or ``'-'``."""
        if sign == "+":
            return self.nu, self.mu
        if sign == "-":
            return -self.mu.conjugate(), self.nu.conjugate()
        raise ValueError(f"outcome sign must be '+' or '-', got {sign!r}")


PLUS_MINUS = IonBasis(1 / math.sqrt(2), 1 / math.sqrt(2))


@dataclass(frozen=True)
class Correction:
    ion: int
    op: str

    def to_json(self) -> dict:
        return {"ion": self.ion, "op": self.op}


@dataclass(frozen=True)
class OutcomeRecord:
    """One branch of a measurement.

    ``probability`` is conditional on the measured state; ``state`` is the
    normalized post-measurement state (after ``correction``, when one was
    applied), or the zero state for an impossible outcome.
    """

    label: str
    probability: float
    state: HybridState
    correction: tuple[Correction, ...] = ()
    fidelity_vs_target: Optional[float] = None
    absolute_probability: Optional[float] = None
    target: Optional[HybridState] = None
    success: bool = False

    def __post_init__(self):
        object.__setattr__(self, "correction", tuple(self.correction))


def _normalized_or_zero(branch: HybridState) -> HybridState:
    n = norm_sq(branch)
    return branch.scale(1 / math.sqrt(n)) if n > 0 else branch


def absorb_photon(state: HybridState) -> HybridState:
    """Remove the detected photon from every term.

    Raises if two terms differ only in their photon, since a detector that
    does not resolve path or polarization would then leave a mixed state.
    """
    out: dict[BasisLabel, complex] = {}
    for lab, amp in state:
        bare = lab.with_photon(None)
        if bare in out:
            raise ValueError("detected photon is entangled with its own polarization/path; branch is mixed")
        out[bare] = amp
    return HybridState(state.ion_count, out)


PORT_OUTCOMES = ("PhotonUpper", "PhotonLower", "NoPhoton")


def detect_output_ports(state: HybridState) -> dict[str, OutcomeRecord]:
    """Split a state by which output detector clicks.

    ``PhotonLower`` is the lower detector firing. Detected photons are
    absorbed, so the returned states are photon-free. Scattered free-space
    photons are invisible to both detectors.
    """
    keys = {
        "PhotonUpper": lambda lab: lab.photon is not None and lab.photon.path is Path.UPPER,
        "PhotonLower": lambda lab: lab.photon is not None and lab.photon.path is Path.LOWER,
        "NoPhoton": lambda lab: lab.photon is None,
    }
    out = {}
    for name in PORT_OUTCOMES:
        p, branch = project(state, keys[name])
        out[name] = OutcomeRecord(name, p, _normalized_or_zero(absorb_photon(branch)))
    return out


def _require_metastable(state: HybridState, ion: int):
    if not 0 <= ion < state.ion_count:
        raise IndexError(f"ion {ion} out of range for {state.ion_count} ions")
    for lab, _ in state:
        if not lab.ions[ion].metastable:
            raise OutsideQubitSubspace(f"ion {ion} is not in the m+/m- subspace in term {lab}")


def project_ion(state: HybridState, ion: int, vec: tuple[complex, complex]) -> HybridState:
    """Apply ``|v><v|`` on one ion, ``vec`` giving the ket on ``(m+, m-)``."""
    _require_metastable(state, ion)
    bra = {IonLevel.M_PLUS: vec[0].conjugate(), IonLevel.M_MINUS: vec[1].conjugate()}

    def proj(lab: BasisLabel):
        overlap = bra[lab.ions[ion].level]
        return (
            (lab.with_ion(ion, M_PLUS), vec[0] * overlap),
            (lab.with_ion(ion, M_MINUS), vec[1] * overlap),
        )

    return state.apply(proj)


def measure_ion_pair(state: HybridState, ions: tuple[int, int], basis: IonBasis = PLUS_MINUS) -> dict[str, OutcomeRecord]:
    """Measure two ions separately in ``basis``; keys are ``'++'``, ``'+-'``, ``'-+'``, ``'--'``.

    Probabilities are conditional on ``state`` (zero for every outcome when
    ``state`` is zero).
    """
    i, j = ions
    if i == j:
        raise ValueError("measured ions must differ")
    _require_metastable(state, i)
    _require_metastable(state, j)
    total = norm_sq(state)
    out = {}
    for si in "+-":
        after_i = project_ion(state, i, basis.vector(si))
        for sj in "+-":
            branch = project_ion(after_i, j, basis.vector(sj))
            p = norm_sq(branch) / total if total else 0.0
            out[si + sj] = OutcomeRecord(si + sj, p, _normalized_or_zero(branch))
    return out


_PAULI = {
    "X": {IonLevel.M_PLUS: (M_MINUS, 1), IonLevel.M_MINUS: (M_PLUS, 1)},
    "Y": {IonLevel.M_PLUS: (M_MINUS, 1j), IonLevel.M_MINUS: (M_PLUS, -1j)},
    "Z": {IonLevel.M_PLUS: (M_PLUS, 1), IonLevel.M_MINUS: (M_MINUS, -1)},
}


def apply_pauli(state: HybridState, ion_index: int, op: str) -> HybridState:
    """Pauli operator on one ion with ``m+`` as logical 0 and ``m-`` as logical 1."""
    if op not in _PAULI:
        raise ValueError(f"unknown Pauli operator {op!r}")
    _require_metastable(state, ion_index)
    table = _PAULI[op]

    def flip(lab: BasisLabel):
        ion, phase = table[lab.ions[ion_index].level]
        return ((lab.with_ion(ion_index, ion), phase),)

    return state.apply(flip)


def apply_corrections(state: HybridState, corrections: tuple[Correction, ...]) -> HybridState:
    for c in corrections:
        state = apply_pauli(state, c.ion, c.op)
    return state
