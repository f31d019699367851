"""JSON encoding of protocol and feasibility reports.

Report bodies hold no timestamps or host data, so identical inputs give
byte-identical output. Floats use Python's shortest round-trip repr.
"""

from __future__ import annotations

import json
from typing import Any, Mapping

from . import __version__
from .hilbert import state_from_records, state_to_records
from .measurement import Correction, OutcomeRecord
from .protocols import ProtocolReport

SCHEMA_VERSION = 1


def header(engine: str = "sparse", **extra: Any) -> dict:
    return {"generator": "ionmzi", "version": __version__, "engine": engine, **extra}


def _number(x: Any) -> Any:
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    return float(x)


def _from_number(x: Any) -> Any:
    if isinstance(x, dict) and set(x) == {"re", "im"}:
        return complex(x["re"], x["im"])
    return x


def _outcome_to_json(o: OutcomeRecord) -> dict:
    return {
        "label": o.label,
        "conditional_probability": o.probability,
        "absolute_probability": o.absolute_probability,
        "state": state_to_records(o.state),
        "correction": [c.to_json() for c in o.correction],
        "fidelity_vs_target": o.fidelity_vs_target,
        "success": o.success,
        "target": None if o.target is None else state_to_records(o.target),
    }


def _outcome_from_json(d: Mapping, ion_count: int) -> OutcomeRecord:
    return OutcomeRecord(
        label=d["label"],
        probability=d["conditional_probability"],
        state=state_from_records(d["state"], ion_count),
        correction=tuple(Correction(c["ion"], c["op"]) for c in d["correction"]),
        fidelity_vs_target=d["fidelity_vs_target"],
        absolute_probability=d["absolute_probability"],
        target=None if d["target"] is None else state_from_records(d["target"], ion_count),
        success=d["success"],
    )


def report_to_json(report: ProtocolReport, engine: str = "sparse") -> dict:
    target = None
    if report.target_state is not None:
        target = {"ions": list(report.target_ions), "state": state_to_records(report.target_state)}
    return {
        "schema_version": SCHEMA_VERSION,
        "header": header(engine, ion_names=list(report.ion_names)),
        "protocol": report.protocol,
        "inputs": {k: _number(v) for k, v in report.inputs.items()},
        "herald_probability": report.herald_probability,
        "outcomes": [_outcome_to_json(o) for o in report.outcomes],
        "total_success_probability": report.total_success_probability,
        "failure_mass": dict(report.failure_mass),
        "target_state": target,
        "notes": list(report.notes),
    }


def report_from_json(d: Mapping) -> ProtocolReport:
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {d.get('schema_version')!r}")
    ion_names = tuple(d["header"]["ion_names"])
    target, target_ions = None, ()
    if d["target_state"] is not None:
        target_ions = tuple(d["target_state"]["ions"])
        target = state_from_records(d["target_state"]["state"], len(target_ions))
    return ProtocolReport(
        protocol=d["protocol"],
        inputs={k: _from_number(v) for k, v in d["inputs"].items()},
        herald_probability=d["herald_probability"],
        outcomes=tuple(_outcome_from_json(o, len(ion_names)) for o in d["outcomes"]),
        total_success_probability=d["total_success_probability"],
        failure_mass=dict(d["failure_mass"]),
        target_state=target,
        target_ions=target_ions,
        ion_names=ion_names,
        notes=tuple(d["notes"]),
    )


def dumps(doc: Mapping) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def loads(text: str) -> ProtocolReport:
    return report_from_json(json.loads(text))
