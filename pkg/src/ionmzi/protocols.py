"""End-to-end teleportation, concentration-by-swapping and remote state preparation.

Ion indices are 0-based inside states. Teleportation uses ions ``(1, 2, 3)``
as indices ``0, 1, 2``; swapping and remote preparation use ions
``(1, 2, 3, 4)`` as ``0..3``. The interferometer photon always enters on
the lower input port with sigma+ polarization, and the lower output
detector firing heralds success.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Optional

from .hilbert import (
    NORM_TOL,
    Factor,
    HybridState,
    Path,
    Pol,
    compose,
    fidelity_mod_phase,
)
from .ion_photon import scatter_arm
from .measurement import (
    PLUS_MINUS,
    Correction,
    IonBasis,
    OutcomeRecord,
    apply_corrections,
    detect_output_ports,
    measure_ion_pair,
)
from .optics import beam_splitter, inject_photon

SUCCESS_TOL = 1e-9
OUTCOME_LABELS = ("++", "+-", "-+", "--")
_R = 1 / math.sqrt(2)


class NormalizationError(ValueError):
    """Input amplitudes are not normalized and rescaling was not requested."""


class ConsistencyError(RuntimeError):
    """A probability or fidelity invariant failed on a finished report."""


@dataclass(frozen=True)
class ProtocolReport:
    """Result of one protocol run.

    ``herald_probability`` is the chance that the lower detector fires;
    every outcome carries both its probability conditional on the herald and
    its absolute probability. ``failure_mass`` holds the probability of the
    non-heralded detector events. ``target_state`` lives on the ions listed
    in ``target_ions`` (0-based).
    """

    protocol: str
    inputs: Mapping[str, object]
    herald_probability: float
    outcomes: tuple[OutcomeRecord, ...]
    total_success_probability: float
    failure_mass: Mapping[str, float]
    target_state: Optional[HybridState] = None
    target_ions: tuple[int, ...] = ()
    ion_names: tuple[str, ...] = ()
    notes: tuple[str, ...] = ()

    def outcome(self, label: str) -> OutcomeRecord:
        for rec in self.outcomes:
            if rec.label == label:
                return rec
        raise KeyError(label)


def _check_pair(names: tuple[str, str], x: complex, y: complex, normalize: bool, notes: list[str]):
    x, y = complex(x), complex(y)
    n = abs(x) ** 2 + abs(y) ** 2
    if abs(n - 1) <= NORM_TOL:
        return x, y
    if not normalize or n == 0:
        raise NormalizationError(f"|{names[0]}|^2 + |{names[1]}|^2 = {n!r}, expected 1")
    s = math.sqrt(n)
    notes.append(f"({names[0]}, {names[1]}) rescaled by 1/{s!r}")
    return x / s, y / s


def run_mzi(state: HybridState, upper_ion: int, lower_ion: int) -> HybridState:
    """Send one sigma+ photon through the interferometer with two ions in its arms."""
    state = inject_photon(state, Path.LOWER, Pol.SIGMA_PLUS)
    state = beam_splitter(state)
    state = scatter_arm(state, upper_ion, Path.UPPER)
    state = scatter_arm(state, lower_ion, Path.LOWER)
    return beam_splitter(state)


def herald(state: HybridState) -> tuple[float, HybridState, dict[str, float]]:
    """Post-select on the lower detector; returns (probability, state, failure masses)."""
    ports = detect_output_ports(state)
    lower = ports["PhotonLower"]
    failure = {"photon_upper": ports["PhotonUpper"].probability, "no_photon": ports["NoPhoton"].probability}
    return lower.probability, lower.state, failure


def _embedded_target(ion_count: int, measured: dict[int, tuple[complex, complex]], rest: Factor) -> HybridState:
    factors = [Factor((i,), {("m+",): v[0], ("m-",): v[1]}) for i, v in measured.items()]
    return compose(factors + [rest], ion_count).normalized()


def _finish_outcomes(
    heralded: HybridState,
    herald_p: float,
    ions: tuple[int, int],
    basis: IonBasis,
    plan: Mapping[str, tuple[tuple[Correction, ...], Factor, bool]],
) -> tuple[OutcomeRecord, ...]:
    """Measure, correct, and score each outcome against its target.

    ``plan`` maps an outcome label to (corrections, ideal state of the
    unmeasured ions, whether the outcome counts towards success).
    """
    records = measure_ion_pair(heralded, ions, basis)
    out = []
    for lab in OUTCOME_LABELS:
        rec = records[lab]
        corrections, rest, declared = plan[lab]
        target = _embedded_target(
            heralded.ion_count, {ions[0]: basis.vector(lab[0]), ions[1]: basis.vector(lab[1])}, rest
        )
        if rec.probability > 0:
            fixed = apply_corrections(rec.state, corrections)
            fid = fidelity_mod_phase(fixed, target)
        else:
            fixed, fid = rec.state, None
        out.append(
            OutcomeRecord(
                label=lab,
                probability=rec.probability,
                state=fixed,
                correction=corrections,
                fidelity_vs_target=fid,
                absolute_probability=herald_p * rec.probability,
                target=target,
                success=declared and fid is not None and fid >= 1 - SUCCESS_TOL,
            )
        )
    return tuple(out)


def teleport(alpha: complex, beta: complex, *, normalize: bool = False) -> ProtocolReport:
    """Teleport ``alpha|m+> + beta|m->`` from ion 1 to ion 3 over a Bell pair on ions 2, 3."""
    notes: list[str] = []
    a, b = _check_pair(("alpha", "beta"), alpha, beta, normalize, notes)
    source = Factor((0,), {("m+",): a, ("m-",): b})
    bell = Factor((1, 2), {("m+", "m+"): _R, ("m-", "m-"): _R})
    state = run_mzi(compose([source, bell], 3), 0, 1)
    herald_p, heralded, failure = herald(state)

    received = Factor((2,), {("m+",): a, ("m-",): b})
    y = (Correction(2, "Y"),)
    x = (Correction(2, "X"),)
    plan = {"++": (y, received, True), "--": (y, received, True), "+-": (x, received, True), "-+": (x, received, True)}
    outcomes = _finish_outcomes(heralded, herald_p, (0, 1), PLUS_MINUS, plan)
    return ProtocolReport(
        protocol="teleport",
        inputs={"alpha": complex(alpha), "beta": complex(beta), "normalize": normalize},
        herald_probability=herald_p,
        outcomes=outcomes,
        total_success_probability=math.fsum(o.absolute_probability for o in outcomes if o.success),
        failure_mass=failure,
        target_state=compose([Factor((0,), {("m+",): a, ("m-",): b})], 1),
        target_ions=(2,),
        ion_names=("1", "2", "3"),
        notes=tuple(notes),
    )


def swapping_front_end(alpha: complex, beta: complex, a: complex, b: complex) -> HybridState:
    """Two channel pairs (ions 1-2 and 3-4) after the interferometer acts on ions 2 and 3."""
    pair12 = Factor((0, 1), {("m+", "m+"): alpha, ("m-", "m-"): beta})
    pair34 = Factor((2, 3), {("m+", "m+"): a, ("m-", "m-"): b})
    return run_mzi(compose([pair12, pair34], 4), 1, 2)


# state of ions 1..4 that a matched-channel herald should leave, normalized
FOUR_ION_GHZ_LIKE = compose(
    [Factor((0, 1, 2, 3), {("m-", "m-", "m+", "m+"): _R, ("m+", "m+", "m-", "m-"): -_R})], 4
)
SINGLET_14 = Factor((0, 3), {("m-", "m+"): _R, ("m+", "m-"): -_R})
TRIPLET_14 = Factor((0, 3), {("m-", "m+"): _R, ("m+", "m-"): _R})


def concentrate_via_swapping(
    alpha: complex, beta: complex, a: complex, b: complex, *, normalize: bool = False
) -> ProtocolReport:
    """Entangle ions 1 and 4 by running the interferometer on ions 2 and 3.

    With matched channels (``alpha == a``) every measurement outcome on
    ions 2, 3 leaves ions 1, 4 in a Bell state. Outcomes only count as
    successes when that Bell state is actually reached.
    """
    notes: list[str] = []
    inputs = {"alpha": complex(alpha), "beta": complex(beta), "a": complex(a), "b": complex(b), "normalize": normalize}
    alpha, beta = _check_pair(("alpha", "beta"), alpha, beta, normalize, notes)
    a, b = _check_pair(("a", "b"), a, b, normalize, notes)
    herald_p, heralded, failure = herald(swapping_front_end(alpha, beta, a, b))

    plan = {
        "++": ((), SINGLET_14, True),
        "--": ((), SINGLET_14, True),
        "+-": ((), TRIPLET_14, True),
        "-+": ((), TRIPLET_14, True),
    }
    outcomes = _finish_outcomes(heralded, herald_p, (1, 2), PLUS_MINUS, plan)
    if abs(alpha - a) > NORM_TOL or abs(beta - b) > NORM_TOL:
        notes.append("channels are not matched; the heralded state is not maximally entangled in general")
    return ProtocolReport(
        protocol="concentrate",
        inputs=inputs,
        herald_probability=herald_p,
        outcomes=outcomes,
        total_success_probability=math.fsum(o.absolute_probability for o in outcomes if o.success),
        failure_mass=failure,
        target_state=FOUR_ION_GHZ_LIKE,
        target_ions=(0, 1, 2, 3),
        ion_names=("1", "2", "3", "4"),
        notes=tuple(notes),
    )


def rsp_target_coefficients(mu: complex, nu: complex) -> tuple[float, float]:
    """Coefficients ``(m, n)`` of ``m|m+ m-> + n|m- m+>`` prepared on ions 1, 4."""
    nu2, mu2 = abs(nu) ** 2, abs(mu) ** 2
    s = math.sqrt(nu2**2 + mu2**2)
    return nu2 / s, mu2 / s


def remote_prepare(a: complex, b: complex, mu: complex, nu: complex, *, normalize: bool = False) -> ProtocolReport:
    """Prepare ``m|m+>_1|m->_4 + n|m->_1|m+>_4`` by measuring ions 2, 3 in a rotated basis.

    Both channel pairs carry the coefficients ``(a, b)``. Outcome ``+-``
    yields the target directly, ``-+`` after X on ions 1 and 4; ``++`` and
    ``--`` yield the singlet and are reported as failures.
    """
    notes: list[str] = []
    inputs = {"a": complex(a), "b": complex(b), "mu": complex(mu), "nu": complex(nu), "normalize": normalize}
    a, b = _check_pair(("a", "b"), a, b, normalize, notes)
    mu, nu = _check_pair(("mu", "nu"), mu, nu, normalize, notes)
    basis = IonBasis(nu=nu, mu=mu)
    herald_p, heralded, failure = herald(swapping_front_end(a, b, a, b))

    m, n = rsp_target_coefficients(mu, nu)
    target = Factor((0, 3), {("m+", "m-"): m, ("m-", "m+"): n})
    flip = (Correction(0, "X"), Correction(3, "X"))
    plan = {
        "++": ((), SINGLET_14, False),
        "--": ((), SINGLET_14, False),
        "+-": ((), target, True),
        "-+": (flip, target, True),
    }
    outcomes = _finish_outcomes(heralded, herald_p, (1, 2), basis, plan)
    return ProtocolReport(
        protocol="rsp",
        inputs=inputs,
        herald_probability=herald_p,
        outcomes=outcomes,
        total_success_probability=math.fsum(o.absolute_probability for o in outcomes if o.success),
        failure_mass=failure,
        target_state=compose([Factor((0, 1), {("m+", "m-"): m, ("m-", "m+"): n})], 2),
        target_ions=(0, 3),
        ion_names=("1", "2", "3", "4"),
        notes=tuple(notes),
    )


PROTOCOLS = {
    "teleport": teleport,
    "concentrate": concentrate_via_swapping,
    "rsp": remote_prepare,
}

# outcomes that must reach their target whenever they occur
_MUST_SUCCEED = {"teleport": OUTCOME_LABELS, "rsp": ("+-", "-+"), "concentrate": ()}


def check_report(report: ProtocolReport, tol: float = 1e-9) -> None:
    """Raise :class:`ConsistencyError` if the report's probability budget or fidelities are off."""
    budget = report.herald_probability + math.fsum(report.failure_mass.values())
    if abs(budget - 1) > 1e-12:
        raise ConsistencyError(f"detector probabilities sum to {budget!r}")
    cond = math.fsum(o.probability for o in report.outcomes)
    absolute = math.fsum(o.absolute_probability for o in report.outcomes)
    if report.herald_probability > 0 and abs(cond - 1) > tol:
        raise ConsistencyError(f"conditional outcome probabilities sum to {cond!r}")
    if abs(absolute - report.herald_probability) > tol:
        raise ConsistencyError(f"absolute outcome probabilities sum to {absolute!r}")
    for o in report.outcomes:
        if abs(o.absolute_probability - report.herald_probability * o.probability) > tol:
            raise ConsistencyError(f"outcome {o.label}: absolute != herald * conditional")
        if o.success and (o.fidelity_vs_target is None or o.fidelity_vs_target < 1 - SUCCESS_TOL):
            raise ConsistencyError(f"outcome {o.label} marked successful at fidelity {o.fidelity_vs_target}")
        if o.label in _MUST_SUCCEED.get(report.protocol, ()) and o.absolute_probability > tol and not o.success:
            raise ConsistencyError(f"outcome {o.label} failed to reach its target")
