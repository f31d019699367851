"""Sparse pure states of trapped ions coupled to a single interferometer photon.

A basis label records, for every ion, its internal level and whether it has
already emitted a free-space photon, together with the photon sector of the
Mach-Zehnder interferometer (vacuum or one photon with path and
polarization). A :class:`HybridState` maps labels to complex amplitudes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Iterable, Iterator, Mapping, Optional, Sequence

PRUNE_TOL = 1e-15
NORM_TOL = 1e-9


class IonLevel(enum.Enum):
    M_PLUS = "m+"
    M_MINUS = "m-"
    GROUND = "g"


class Path(enum.Enum):
    UPPER = "u"
    LOWER = "l"


class Pol(enum.Enum):
    SIGMA_PLUS = "+"
    SIGMA_MINUS = "-"


_LEVEL_ORDER = {IonLevel.M_PLUS: 0, IonLevel.M_MINUS: 1, IonLevel.GROUND: 2}
_PATH_ORDER = {Path.UPPER: 0, Path.LOWER: 1}
_POL_ORDER = {Pol.SIGMA_PLUS: 0, Pol.SIGMA_MINUS: 1}


@dataclass(frozen=True)
class IonLabel:
    level: IonLevel
    scattered: bool = False

    def __post_init__(self):
        if not isinstance(self.level, IonLevel):
            object.__setattr__(self, "level", IonLevel(self.level))
        if self.scattered and self.level is not IonLevel.GROUND:
            raise ValueError("only an ion in the ground level can carry a scattered photon")

    @property
    def metastable(self) -> bool:
        return self.level is not IonLevel.GROUND

    def sort_key(self) -> tuple[int, int]:
        return _LEVEL_ORDER[self.level], int(self.scattered)


M_PLUS = IonLabel(IonLevel.M_PLUS)
M_MINUS = IonLabel(IonLevel.M_MINUS)
GROUND = IonLabel(IonLevel.GROUND)
SCATTERED = IonLabel(IonLevel.GROUND, scattered=True)

# every valid per-ion label, in canonical order
ION_LABELS = (M_PLUS, M_MINUS, GROUND, SCATTERED)


@dataclass(frozen=True)
class Photon:
    """One photon inside the interferometer."""

    path: Path
    pol: Pol = Pol.SIGMA_PLUS

    def __post_init__(self):
        if not isinstance(self.path, Path):
            object.__setattr__(self, "path", Path(self.path))
        if not isinstance(self.pol, Pol):
            object.__setattr__(self, "pol", Pol(self.pol))

    def sort_key(self) -> int:
        return 1 + 2 * _PATH_ORDER[self.path] + _POL_ORDER[self.pol]

    def __str__(self) -> str:
        return self.path.value + self.pol.value


# The photon sector is ``None`` for the vacuum, otherwise a ``Photon``.
PhotonSector = Optional[Photon]
PHOTON_SECTORS: tuple[Photon | None, ...] = (
    None,
    Photon(Path.UPPER, Pol.SIGMA_PLUS),
    Photon(Path.UPPER, Pol.SIGMA_MINUS),
    Photon(Path.LOWER, Pol.SIGMA_PLUS),
    Photon(Path.LOWER, Pol.SIGMA_MINUS),
)


def photon_sort_key(photon: Photon | None) -> int:
    return 0 if photon is None else photon.sort_key()


def photon_to_str(photon: Photon | None) -> str:
    return "vac" if photon is None else str(photon)


def photon_from_str(text: str) -> Photon | None:
    if text == "vac":
        return None
    if len(text) != 2:
        raise ValueError(f"bad photon sector {text!r}")
    return Photon(Path(text[0]), Pol(text[1]))


@dataclass(frozen=True)
class BasisLabel:
    ions: tuple[IonLabel, ...]
    photon: Photon | None = None

    def __post_init__(self):
        object.__setattr__(self, "ions", tuple(self.ions))

    def sort_key(self) -> tuple:
        return tuple(ion.sort_key() for ion in self.ions) + (photon_sort_key(self.photon),)

    def __lt__(self, other: BasisLabel) -> bool:
        return self.sort_key() < other.sort_key()

    def with_ion(self, index: int, ion: IonLabel) -> BasisLabel:
        ions = list(self.ions)
        ions[index] = ion
        return BasisLabel(tuple(ions), self.photon)

    def with_photon(self, photon: Photon | None) -> BasisLabel:
        return BasisLabel(self.ions, photon)

    def __str__(self) -> str:
        parts = []
        for ion in self.ions:
            parts.append("S" if ion.scattered else ion.level.value)
        return "|" + ",".join(parts) + ";" + photon_to_str(self.photon) + ">"


def label(*levels: str | IonLevel | IonLabel, photon: Photon | str | None = None) -> BasisLabel:
    """Build a basis label from short level names.

    ``"m+"``, ``"m-"`` and ``"g"`` are the three levels; ``"S"`` stands for a
    ground-state ion that has emitted its scattered photon.

    >>> str(label("m+", "S", photon="l+"))
    '|m+,S;l+>'
    """
    ions = []
    for lev in levels:
        if isinstance(lev, IonLabel):
            ions.append(lev)
        elif lev == "S":
            ions.append(SCATTERED)
        else:
            ions.append(IonLabel(IonLevel(lev)))
    if isinstance(photon, str):
        photon = photon_from_str(photon)
    return BasisLabel(tuple(ions), photon)


LinearMap = Callable[[BasisLabel], Iterable[tuple[BasisLabel, complex]]]


class HybridState:
    """Immutable sparse amplitude map over basis labels with a fixed ion count.

    Amplitudes below ``PRUNE_TOL`` in magnitude are dropped on construction.
    Iteration yields ``(label, amplitude)`` pairs in canonical label order.
    """

    __slots__ = ("_amps", "ion_count")

    def __init__(self, ion_count: int, amplitudes: Mapping[BasisLabel, complex] | None = None):
        if ion_count < 1:
            raise ValueError("ion_count must be positive")
        amps = {}
        for lab, amp in (amplitudes or {}).items():
            if len(lab.ions) != ion_count:
                raise ValueError(f"label {lab} does not have {ion_count} ions")
            amp = complex(amp)
            if abs(amp) >= PRUNE_TOL:
                amps[lab] = amp
        self._amps = MappingProxyType(dict(sorted(amps.items(), key=lambda kv: kv[0].sort_key())))
        self.ion_count = ion_count

    @classmethod
    def basis(cls, lab: BasisLabel, amplitude: complex = 1.0) -> HybridState:
        return cls(len(lab.ions), {lab: amplitude})

    @classmethod
    def zero(cls, ion_count: int) -> HybridState:
        return cls(ion_count)

    @property
    def amplitudes(self) -> Mapping[BasisLabel, complex]:
        return self._amps

    def __iter__(self) -> Iterator[tuple[BasisLabel, complex]]:
        return iter(self._amps.items())

    def __len__(self) -> int:
        return len(self._amps)

    def __getitem__(self, lab: BasisLabel) -> complex:
        return self._amps.get(lab, 0j)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HybridState):
            return NotImplemented
        return self.ion_count == other.ion_count and dict(self._amps) == dict(other._amps)

    def __repr__(self) -> str:
        terms = " + ".join(f"({amp:.6g}){lab}" for lab, amp in self)
        return f"HybridState({self.ion_count}, {terms or '0'})"

    def __add__(self, other: HybridState) -> HybridState:
        if other.ion_count != self.ion_count:
            raise ValueError("ion counts differ")
        amps = dict(self._amps)
        for lab, amp in other:
            amps[lab] = amps.get(lab, 0j) + amp
        return HybridState(self.ion_count, amps)

    def __sub__(self, other: HybridState) -> HybridState:
        return self + other.scale(-1)

    def scale(self, factor: complex) -> HybridState:
        return HybridState(self.ion_count, {lab: factor * amp for lab, amp in self})

    __rmul__ = scale

    def apply(self, fn: LinearMap) -> HybridState:
        """Extend a map defined on basis labels linearly to the whole state."""
        out: dict[BasisLabel, complex] = {}
        for lab, amp in self:
            for image, coeff in fn(lab):
                out[image] = out.get(image, 0j) + coeff * amp
        return HybridState(self.ion_count, out)

    def normalized(self) -> HybridState:
        n = norm_sq(self)
        if n == 0:
            raise ValueError("cannot normalize the zero state")
        return self.scale(1 / math.sqrt(n))

    def max_abs_diff(self, other: HybridState) -> float:
        labels = set(self._amps) | set(other._amps)
        return max((abs(self[lab] - other[lab]) for lab in labels), default=0.0)


def norm_sq(state: HybridState) -> float:
    return math.fsum(abs(amp) ** 2 for _, amp in state)


def inner(a: HybridState, b: HybridState) -> complex:
    """``<a|b>``, conjugate-linear in the first argument."""
    if a.ion_count != b.ion_count:
        raise ValueError("ion counts differ")
    if len(a) > len(b):
        return inner(b, a).conjugate()
    return sum((amp.conjugate() * b[lab] for lab, amp in a), 0j)


def fidelity_mod_phase(a: HybridState, b: HybridState) -> float:
    """Overlap ``|<a|b>|^2 / (<a|a><b|b>)``; blind to a global phase on either side."""
    na, nb = norm_sq(a), norm_sq(b)
    if na == 0 or nb == 0:
        raise ValueError("fidelity is undefined for a zero-norm state")
    return min(1.0, abs(inner(a, b)) ** 2 / (na * nb))


def project(state: HybridState, keep: Callable[[BasisLabel], bool]) -> tuple[float, HybridState]:
    """Keep the terms selected by ``keep``.

    Returns the branch probability relative to ``state`` and the branch
    itself, not renormalized. An empty branch, or a zero input, gives
    probability 0.
    """
    branch = HybridState(state.ion_count, {lab: amp for lab, amp in state if keep(lab)})
    total = norm_sq(state)
    return (norm_sq(branch) / total if total else 0.0), branch


@dataclass(frozen=True)
class Factor:
    """A superposition of level configurations for a subset of ions.

    ``terms`` maps a tuple of levels (one per entry of ``ions``) to an
    amplitude, e.g. ``Factor((1, 2), {("m+", "m+"): r, ("m-", "m-"): r})``.
    """

    ions: tuple[int, ...]
    terms: Mapping[tuple, complex]

    def __post_init__(self):
        object.__setattr__(self, "ions", tuple(self.ions))
        parsed = {}
        for key, amp in self.terms.items():
            if isinstance(key, (str, IonLevel, IonLabel)):
                key = (key,)
            if len(key) != len(self.ions):
                raise ValueError(f"term {key} does not match ions {self.ions}")
            ions = label(*key).ions
            parsed[ions] = parsed.get(ions, 0j) + complex(amp)
        object.__setattr__(self, "terms", MappingProxyType(parsed))

    def norm_sq(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.terms.values())


def compose(
    factors: Sequence[Factor],
    ion_count: int | None = None,
    photon: Photon | str | None = None,
    *,
    allow_unnormalized: bool = False,
) -> HybridState:
    """Tensor product of ion factors with a single photon basis state.

    Every ion index in ``range(ion_count)`` must be covered by exactly one
    factor. Factors must be normalized unless ``allow_unnormalized`` is set.
    """
    covered = [i for f in factors for i in f.ions]
    if ion_count is None:
        ion_count = len(covered)
    if sorted(covered) != list(range(ion_count)):
        raise ValueError(f"factors cover ions {sorted(covered)}, expected 0..{ion_count - 1}")
    if not allow_unnormalized:
        for f in factors:
            if abs(f.norm_sq() - 1) > NORM_TOL:
                raise ValueError(f"factor on ions {f.ions} has norm^2 {f.norm_sq()!r}")
    if isinstance(photon, str):
        photon = photon_from_str(photon)

    partial: dict[tuple[IonLabel | None, ...], complex] = {(None,) * ion_count: 1 + 0j}
    for f in factors:
        nxt: dict[tuple[IonLabel | None, ...], complex] = {}
        for slots, amp in partial.items():
            for ions, coeff in f.terms.items():
                filled = list(slots)
                for idx, ion in zip(f.ions, ions):
                    filled[idx] = ion
                key = tuple(filled)
                nxt[key] = nxt.get(key, 0j) + amp * coeff
        partial = nxt
    return HybridState(ion_count, {BasisLabel(k, photon): a for k, a in partial.items()})


def _ion_to_json(ion: IonLabel) -> dict:
    return {"level": ion.level.value, "scattered": ion.scattered}


def state_to_records(state: HybridState) -> list[dict]:
    """Canonical serialization: one record per term, in canonical label order."""
    return [
        {
            "ions": [_ion_to_json(ion) for ion in lab.ions],
            "photon": photon_to_str(lab.photon),
            "re": amp.real,
            "im": amp.imag,
        }
        for lab, amp in state
    ]


def state_from_records(records: Sequence[Mapping], ion_count: int | None = None) -> HybridState:
    amps = {}
    for rec in records:
        ions = tuple(IonLabel(IonLevel(i["level"]), bool(i["scattered"])) for i in rec["ions"])
        amps[BasisLabel(ions, photon_from_str(rec["photon"]))] = complex(rec["re"], rec["im"])
        if ion_count is None:
            ion_count = len(ions)
    if ion_count is None:
        raise ValueError("ion_count is required for an empty record list")
    return HybridState(ion_count, amps)
