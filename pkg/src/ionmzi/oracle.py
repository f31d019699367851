"""Dense reference implementation used to cross-check the sparse engine.

Everything here works on flat numpy vectors over the full label space and on
operator matrices written out entry by entry. Only the label types and the
report dataclasses are shared with the sparse code.

Each ion has four labels, digit 0..3 = m+, m-, g, g+scattered; the photon has
five, digit 0..4 = vacuum, u+, u-, l+, l-. A label's index is the mixed-radix
number with ion 0 most significant and the photon least significant, which
matches the canonical label order of :class:`~ionmzi.hilbert.HybridState`.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from .hilbert import ION_LABELS, PHOTON_SECTORS, BasisLabel, HybridState
from .measurement import Correction, OutcomeRecord
from .protocols import OUTCOME_LABELS, SUCCESS_TOL, ProtocolReport

MAX_IONS = 4
NI, NP = 4, 5
MP, MM, G, S = range(4)
VAC, UP_P, UP_M, LO_P, LO_M = range(5)

SQ = 1 / math.sqrt(2)


def dim(n: int) -> int:
    return NI**n * NP


def digits(n: int):
    """All (ion digits..., photon digit) tuples in index order."""
    return itertools.product(*([range(NI)] * n + [range(NP)]))


def index(d: tuple[int, ...]) -> int:
    i = 0
    for k in d[:-1]:
        i = i * NI + k
    return i * NP + d[-1]


def to_dense(state: HybridState) -> np.ndarray:
    ion_pos = {lab: k for k, lab in enumerate(ION_LABELS)}
    ph_pos = {ph: k for k, ph in enumerate(PHOTON_SECTORS)}
    v = np.zeros(dim(state.ion_count), dtype=complex)
    for lab, amp in state:
        v[index(tuple(ion_pos[i] for i in lab.ions) + (ph_pos[lab.photon],))] = amp
    return v


def from_dense(v: np.ndarray, n: int) -> HybridState:
    amps = {}
    for d in digits(n):
        amp = v[index(d)]
        if amp != 0:
            amps[BasisLabel(tuple(ION_LABELS[k] for k in d[:-1]), PHOTON_SECTORS[d[-1]])] = complex(amp)
    return HybridState(n, amps)


def _check_n(n: int):
    if not 1 <= n <= MAX_IONS:
        raise ValueError(f"dense oracle supports 1..{MAX_IONS} ions, got {n}")


@lru_cache(maxsize=None)
def inject_matrix(n: int) -> np.ndarray:
    """Vacuum -> lower sigma+ photon; other photon sectors have no image."""
    _check_n(n)
    M = np.zeros((dim(n), dim(n)), dtype=complex)
    for d in digits(n):
        if d[-1] == VAC:
            M[index(d[:-1] + (LO_P,)), index(d)] = 1
    return M


@lru_cache(maxsize=None)
def bs_matrix(n: int) -> np.ndarray:
    _check_n(n)
    M = np.zeros((dim(n), dim(n)), dtype=complex)
    for d in digits(n):
        col, ions, ph = index(d), d[:-1], d[-1]
        if ph == VAC:
            M[col, col] = 1
            continue
        plus = ph in (UP_P, LO_P)
        up, lo = (UP_P, LO_P) if plus else (UP_M, LO_M)
        if ph == lo:
            # lower input: transmitted to upper, reflected (x i) into lower
            M[index(ions + (up,)), col] += SQ
            M[index(ions + (lo,)), col] += 1j * SQ
        else:
            M[index(ions + (lo,)), col] += SQ
            M[index(ions + (up,)), col] += 1j * SQ
    return M


@lru_cache(maxsize=None)
def scatter_matrix(n: int, ion: int, upper: bool) -> np.ndarray:
    _check_n(n)
    arm_photons = {UP_P: MP, UP_M: MM} if upper else {LO_P: MP, LO_M: MM}
    M = np.zeros((dim(n), dim(n)), dtype=complex)
    for d in digits(n):
        col = index(d)
        ph = d[-1]
        if ph in arm_photons and d[ion] == arm_photons[ph]:
            out = list(d)
            out[ion] = S
            out[-1] = VAC
            M[index(tuple(out)), col] = 1
        else:
            M[col, col] = 1
    return M


@lru_cache(maxsize=None)
def photon_projector(n: int, sectors: frozenset) -> np.ndarray:
    _check_n(n)
    diag = np.array([1.0 if d[-1] in sectors else 0.0 for d in digits(n)])
    return np.diag(diag).astype(complex)


@lru_cache(maxsize=None)
def absorb_matrix(n: int) -> np.ndarray:
    """Move every photon sector onto the vacuum (used after a detector click)."""
    _check_n(n)
    M = np.zeros((dim(n), dim(n)), dtype=complex)
    for d in digits(n):
        M[index(d[:-1] + (VAC,)), index(d)] = 1
    return M


def local_ion_matrix(n: int, ion: int, op: np.ndarray) -> np.ndarray:
    """Embed a 2x2 operator on (m+, m-) of one ion; zero on its ground labels."""
    _check_n(n)
    M = np.zeros((dim(n), dim(n)), dtype=complex)
    for d in digits(n):
        if d[ion] not in (MP, MM):
            continue
        for r in (MP, MM):
            out = list(d)
            out[ion] = r
            M[index(tuple(out)), index(d)] = op[r, d[ion]]
    return M


PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def metastable_weight(v: np.ndarray, n: int, ion: int) -> float:
    return float(sum(abs(v[index(d)]) ** 2 for d in digits(n) if d[ion] in (MP, MM)))


def product_vector(n: int, blocks: list[tuple[tuple[int, ...], dict[tuple[int, ...], complex]]]) -> np.ndarray:
    """Photon-free product state; each block gives ion indices and amplitudes over their digits."""
    _check_n(n)
    v = np.zeros(dim(n), dtype=complex)
    for d in digits(n):
        if d[-1] != VAC:
            continue
        amp = 1 + 0j
        for ions, table in blocks:
            amp *= table.get(tuple(d[i] for i in ions), 0)
            if amp == 0:
                break
        v[index(d)] = amp
    return v


def _nsq(v: np.ndarray) -> float:
    return float(np.vdot(v, v).real)


def _fid(a: np.ndarray, b: np.ndarray) -> float:
    return min(1.0, abs(np.vdot(a, b)) ** 2 / (_nsq(a) * _nsq(b)))


def _unit(v: np.ndarray) -> np.ndarray:
    n = _nsq(v)
    return v / math.sqrt(n) if n > 0 else v


def mzi(v: np.ndarray, n: int, upper_ion: int, lower_ion: int) -> np.ndarray:
    for M in (
        inject_matrix(n),
        bs_matrix(n),
        scatter_matrix(n, upper_ion, True),
        scatter_matrix(n, lower_ion, False),
        bs_matrix(n),
    ):
        v = M @ v
    return v


def _basis_vecs(nu: complex, mu: complex) -> dict[str, np.ndarray]:
    return {"+": np.array([nu, mu]), "-": np.array([-np.conj(mu), np.conj(nu)])}


def _run(n, v0, upper, lower, measured, basis, plan, rest_blocks):
    v = mzi(v0, n, upper, lower)
    lower_p = photon_projector(n, frozenset({LO_P, LO_M}))
    upper_p = photon_projector(n, frozenset({UP_P, UP_M}))
    vac_p = photon_projector(n, frozenset({VAC}))
    total = _nsq(v)
    herald_p = _nsq(lower_p @ v) / total
    failure = {"photon_upper": _nsq(upper_p @ v) / total, "no_photon": _nsq(vac_p @ v) / total}
    heralded = _unit(absorb_matrix(n) @ (lower_p @ v))

    i, j = measured
    for ion in measured:
        if _nsq(heralded) > 0 and abs(metastable_weight(heralded, n, ion) - _nsq(heralded)) > 1e-12:
            raise ValueError(f"measured ion {ion} left the qubit subspace")
    outcomes = []
    for lab in OUTCOME_LABELS:
        vi, vj = basis[lab[0]], basis[lab[1]]
        Pi = local_ion_matrix(n, i, np.outer(vi, vi.conj()))
        Pj = local_ion_matrix(n, j, np.outer(vj, vj.conj()))
        branch = Pj @ (Pi @ heralded)
        hn = _nsq(heralded)
        p = _nsq(branch) / hn if hn > 0 else 0.0
        corrections, rest, declared = plan[lab]
        target = _unit(
            product_vector(n, [((i,), {(MP,): vi[0], (MM,): vi[1]}), ((j,), {(MP,): vj[0], (MM,): vj[1]})] + rest_blocks[rest])
        )
        state = _unit(branch)
        if p > 0:
            for c in corrections:
                state = local_ion_matrix(n, c.ion, PAULI[c.op]) @ state
            fid = _fid(state, target)
        else:
            fid = None
        outcomes.append(
            OutcomeRecord(
                label=lab,
                probability=p,
                state=from_dense(state, n),
                correction=corrections,
                fidelity_vs_target=fid,
                absolute_probability=herald_p * p,
                target=from_dense(target, n),
                success=declared and fid is not None and fid >= 1 - SUCCESS_TOL,
            )
        )
    return herald_p, failure, tuple(outcomes)


def _complex_inputs(params: dict) -> dict:
    return {k: complex(v) for k, v in params.items()}


def _require_norm(x, y, what):
    if abs(abs(x) ** 2 + abs(y) ** 2 - 1) > 1e-9:
        raise ValueError(f"{what} not normalized")


def dense_run(protocol: str, params: dict) -> ProtocolReport:
    """Run ``protocol`` ('teleport', 'concentrate' or 'rsp') on the dense engine.

    ``params`` uses the keyword names of the sparse protocol functions.
    Inputs must already be normalized.
    """
    p = _complex_inputs(params)
    if protocol == "teleport":
        a, b = p["alpha"], p["beta"]
        _require_norm(a, b, "(alpha, beta)")
        n = 3
        v0 = product_vector(n, [((0,), {(MP,): a, (MM,): b}), ((1, 2), {(MP, MP): SQ, (MM, MM): SQ})])
        y, x = (Correction(2, "Y"),), (Correction(2, "X"),)
        plan = {"++": (y, "psi", True), "--": (y, "psi", True), "+-": (x, "psi", True), "-+": (x, "psi", True)}
        rest = {"psi": [((2,), {(MP,): a, (MM,): b})]}
        herald_p, failure, outcomes = _run(n, v0, 0, 1, (0, 1), _basis_vecs(SQ, SQ), plan, rest)
        target = from_dense(product_vector(1, [((0,), {(MP,): a, (MM,): b})]), 1)
        return ProtocolReport(
            "teleport", {"alpha": a, "beta": b, "normalize": False}, herald_p, outcomes,
            math.fsum(o.absolute_probability for o in outcomes if o.success), failure,
            target, (2,), ("1", "2", "3"), (),
        )  # fmt: skip

    n = 4
    singlet = [((0, 3), {(MM, MP): SQ, (MP, MM): -SQ})]
    triplet = [((0, 3), {(MM, MP): SQ, (MP, MM): SQ})]
    ghz = from_dense(product_vector(4, [((0, 1, 2, 3), {(MM, MM, MP, MP): SQ, (MP, MP, MM, MM): -SQ})]), 4)
    if protocol == "concentrate":
        al, be, a, b = p["alpha"], p["beta"], p["a"], p["b"]
        _require_norm(al, be, "(alpha, beta)")
        _require_norm(a, b, "(a, b)")
        v0 = product_vector(n, [((0, 1), {(MP, MP): al, (MM, MM): be}), ((2, 3), {(MP, MP): a, (MM, MM): b})])
        plan = {"++": ((), "s", True), "--": ((), "s", True), "+-": ((), "t", True), "-+": ((), "t", True)}
        herald_p, failure, outcomes = _run(n, v0, 1, 2, (1, 2), _basis_vecs(SQ, SQ), plan, {"s": singlet, "t": triplet})
        notes = ()
        if abs(al - a) > 1e-9 or abs(be - b) > 1e-9:
            notes = ("channels are not matched; the heralded state is not maximally entangled in general",)
        return ProtocolReport(
            "concentrate", {"alpha": al, "beta": be, "a": a, "b": b, "normalize": False}, herald_p, outcomes,
            math.fsum(o.absolute_probability for o in outcomes if o.success), failure,
            ghz, (0, 1, 2, 3), ("1", "2", "3", "4"), notes,
        )  # fmt: skip
    if protocol == "rsp":
        a, b, mu, nu = p["a"], p["b"], p["mu"], p["nu"]
        _require_norm(a, b, "(a, b)")
        _require_norm(mu, nu, "(mu, nu)")
        v0 = product_vector(n, [((0, 1), {(MP, MP): a, (MM, MM): b}), ((2, 3), {(MP, MP): a, (MM, MM): b})])
        s = math.sqrt(abs(nu) ** 4 + abs(mu) ** 4)
        m_, n_ = abs(nu) ** 2 / s, abs(mu) ** 2 / s
        target = [((0, 3), {(MP, MM): m_, (MM, MP): n_})]
        flip = (Correction(0, "X"), Correction(3, "X"))
        plan = {"++": ((), "s", False), "--": ((), "s", False), "+-": ((), "t", True), "-+": (flip, "t", True)}
        herald_p, failure, outcomes = _run(n, v0, 1, 2, (1, 2), _basis_vecs(nu, mu), plan, {"s": singlet, "t": target})
        return ProtocolReport(
            "rsp", {"a": a, "b": b, "mu": mu, "nu": nu, "normalize": False}, herald_p, outcomes,
            math.fsum(o.absolute_probability for o in outcomes if o.success), failure,
            from_dense(product_vector(2, [((0, 1), {(MP, MM): m_, (MM, MP): n_})]), 2),
            (0, 3), ("1", "2", "3", "4"), (),
        )  # fmt: skip
    raise ValueError(f"unknown protocol {protocol!r}")


def report_deviation(a: ProtocolReport, b: ProtocolReport) -> float:
    """Largest absolute difference between two reports over every numeric field and amplitude.

    Structural mismatches (labels, corrections, success flags, missing
    fidelities) count as infinite deviation.
    """
    if (a.protocol, a.target_ions, len(a.outcomes)) != (b.protocol, b.target_ions, len(b.outcomes)):
        return math.inf
    devs = [
        abs(a.herald_probability - b.herald_probability),
        abs(a.total_success_probability - b.total_success_probability),
    ]
    if set(a.failure_mass) != set(b.failure_mass):
        return math.inf
    devs += [abs(a.failure_mass[k] - b.failure_mass[k]) for k in a.failure_mass]
    devs += [abs(complex(a.inputs[k]) - complex(b.inputs[k])) for k in a.inputs if k != "normalize"]
    if (a.target_state is None) != (b.target_state is None):
        return math.inf
    if a.target_state is not None:
        devs.append(a.target_state.max_abs_diff(b.target_state))
    for x, y in zip(a.outcomes, b.outcomes):
        if (x.label, x.correction, x.success) != (y.label, y.correction, y.success):
            return math.inf
        if (x.fidelity_vs_target is None) != (y.fidelity_vs_target is None):
            return math.inf
        devs += [
            abs(x.probability - y.probability),
            abs(x.absolute_probability - y.absolute_probability),
            x.state.max_abs_diff(y.state),
            x.target.max_abs_diff(y.target),
        ]
        if x.fidelity_vs_target is not None:
            devs.append(abs(x.fidelity_vs_target - y.fidelity_vs_target))
    return max(devs)
