"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 a finished report failed its
internal consistency checks.
"""

from __future__ import annotations

import argparse
import configparser
import itertools
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Sequence

from . import feasibility as fz
from .oracle import dense_run
from .protocols import PROTOCOLS, ConsistencyError, NormalizationError, check_report
from .report import SCHEMA_VERSION, dumps, header, report_to_json

EXIT_OK, EXIT_INPUT, EXIT_INCONSISTENT = 0, 2, 3

_UNITS = {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "nm": 1e-9}


class InputError(ValueError):
    pass


def parse_number(text: str) -> complex:
    """Real decimal (``0.6``) or Python complex literal (``0.6+0.1j``)."""
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise InputError(f"not a number: {text!r}") from None


def parse_length(text: str) -> float:
    """Length in meters; accepts an ``m``, ``cm``, ``mm``, ``um`` or ``nm`` suffix."""
    m = re.fullmatch(r"\s*([-+0-9.eE]+)\s*([a-z]*)\s*", text)
    if not m or (m.group(2) and m.group(2) not in _UNITS):
        raise InputError(f"bad length {text!r}")
    try:
        return float(m.group(1)) * _UNITS.get(m.group(2), 1.0)
    except ValueError:
        raise InputError(f"bad length {text!r}") from None


def _real(text: str) -> float:
    z = parse_number(text)
    if z.imag:
        raise InputError(f"expected a real number, got {text!r}")
    return z.real


# --- protocol runs ---------------------------------------------------------


def _pair_from_square(params: dict, sq: str, x: str, y: str) -> None:
    if sq in params:
        p = params.pop(sq).real
        if not 0 <= p <= 1:
            raise InputError(f"{sq} must lie in [0, 1]")
        params.setdefault(x, complex(math.sqrt(p)))
        params.setdefault(y, complex(math.sqrt(1 - p)))


def protocol_params(protocol: str, raw: dict[str, complex]) -> dict[str, complex]:
    """Fill in derived parameters: ``a2 -> (a, b)``, ``mu2 -> (mu, nu)`` and matched channels."""
    params = {k: v for k, v in raw.items() if v is not None}
    _pair_from_square(params, "a2", "a", "b")
    _pair_from_square(params, "alpha2", "alpha", "beta")
    _pair_from_square(params, "mu2", "mu", "nu")
    if protocol == "concentrate":
        params.setdefault("alpha", params.get("a"))
        params.setdefault("beta", params.get("b"))
    needed = {"teleport": ("alpha", "beta"), "concentrate": ("alpha", "beta", "a", "b"), "rsp": ("a", "b", "mu", "nu")}
    unknown = sorted(set(params) - set(needed[protocol]))
    if unknown:
        raise InputError(f"{protocol} does not take {', '.join(unknown)}")
    missing = [k for k in needed[protocol] if params.get(k) is None]
    if missing:
        raise InputError(f"{protocol} is missing {', '.join(missing)}")
    return {k: params[k] for k in needed[protocol]}


def run_protocol(protocol: str, params: dict[str, complex], normalize: bool = False, engine: str = "sparse") -> dict:
    try:
        if engine == "dense":
            if normalize:
                raise InputError("the dense engine does not rescale inputs")
            report = dense_run(protocol, params)
        else:
            report = PROTOCOLS[protocol](**params, normalize=normalize)
    except NormalizationError as exc:
        raise InputError(str(exc)) from None
    except ValueError as exc:
        if engine == "dense" and "normalized" in str(exc):
            raise InputError(str(exc)) from None
        raise
    check_report(report)
    return report_to_json(report, engine)


# --- feasibility -----------------------------------------------------------

_FEAS_KEYS = ("fcav", "length", "wavelength", "dipole", "gamma_nc", "pcav", "eta", "xi", "rate", "a2")


def run_feasibility(values: dict[str, Any]) -> dict:
    """Evaluate the cavity model (or take ``pcav`` directly) and the pair rate."""
    v = {k: values.get(k) for k in _FEAS_KEYS}
    for k in ("eta", "xi", "rate", "a2"):
        if v[k] is None:
            raise InputError(f"feasibility needs --{k.replace('_', '-')}")
    results: dict[str, float] = {}
    notes = []
    try:
        if v["fcav"] is not None and v["length"] is not None:
            results["gamma_per_s"] = fz.cavity_decay_rate(v["fcav"], v["length"])
            ref = fz.REFERENCE_SETUP
            if math.isclose(v["fcav"], ref["finesse"]) and math.isclose(v["length"], ref["length_m"]):
                notes.append(
                    f"decay rate 4*pi*c/(F*L) = {results['gamma_per_s']!r} /s; "
                    f"the quoted operating point lists {ref['quoted_gamma_per_s']!r} /s, which this formula does not reproduce"
                )
        if v["pcav"] is not None:
            p_cav = v["pcav"]
            notes.append("p_cav taken as a direct input")
        else:
            need = [k for k in ("fcav", "length", "wavelength", "dipole", "gamma_nc") if v[k] is None]
            if need:
                raise InputError("cavity model needs " + ", ".join("--" + k.replace("_", "-") for k in need) + " (or --pcav)")
            cav = fz.CavityParams(v["fcav"], v["length"], v["wavelength"], v["dipole"], v["gamma_nc"])
            results["mode_volume_m3"] = fz.mode_volume(cav.length, cav.wavelength)
            results["omega_per_s"] = fz.coupling_constant(cav.dipole, cav.wavelength, results["mode_volume_m3"])
            p_cav = fz.emission_probability(results["gamma_per_s"], cav.loss_rate, results["omega_per_s"])
        results["p_cav"] = p_cav
        y = fz.YieldParams(p_cav=p_cav, eta=v["eta"], xi=v["xi"], a2=v["a2"], rate=v["rate"])
    except (ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(str(exc)) from None
    results["success_probability"] = fz.success_probability(y)
    results["pairs_per_second"] = fz.concentration_rate(y)
    return {
        "schema_version": SCHEMA_VERSION,
        "header": header("closed-form"),
        "protocol": "feasibility",
        "inputs": {k: val for k, val in v.items() if val is not None},
        "results": results,
        "notes": notes,
    }


# --- sweeps ----------------------------------------------------------------

_FEAS_PARSERS = {"length": parse_length, "wavelength": parse_length}


def read_config(path: str | Path) -> dict[str, list[str]]:
    """Flat ``key = v1, v2, ...`` file; ``#`` starts a comment. Order of keys is kept."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), delimiters=("=", ":"))
    cp.optionxform = str
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config: {exc}") from None
    try:
        cp.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise InputError(f"bad config: {exc}") from None
    return {k.strip().replace("-", "_"): [s.strip() for s in v.split(",") if s.strip()] for k, v in cp["run"].items()}


def _convert(protocol: str, key: str, text: str) -> Any:
    if key == "normalize":
        return text.lower() in ("1", "true", "yes", "on")
    if protocol == "feasibility":
        return _FEAS_PARSERS.get(key, _real)(text)
    return parse_number(text)


def sweep_points(config: dict[str, list[str]]) -> tuple[str, list[str], list[dict[str, Any]]]:
    cfg = dict(config)
    if "protocol" not in cfg or len(cfg["protocol"]) != 1:
        raise InputError("config needs exactly one 'protocol'")
    protocol = cfg.pop("protocol")[0]
    if protocol not in (*PROTOCOLS, "feasibility"):
        raise InputError(f"unknown protocol {protocol!r}")
    for key, vals in cfg.items():
        if not vals:
            raise InputError(f"key {key!r} has no values")
    if protocol == "feasibility":
        unknown = sorted(set(cfg) - set(_FEAS_KEYS))
        if unknown:
            raise InputError(f"feasibility does not take {', '.join(unknown)}")
    keys = list(cfg)
    grid_keys = [k for k in keys if len(cfg[k]) > 1]
    points = []
    for combo in itertools.product(*(cfg[k] for k in keys)):
        points.append({k: _convert(protocol, k, t) for k, t in zip(keys, combo)})
    return protocol, grid_keys, points


def _run_point(job: tuple[str, dict[str, Any], str]) -> dict:
    protocol, point, engine = job
    if protocol == "feasibility":
        return run_feasibility(point)
    point = dict(point)
    normalize = bool(point.pop("normalize", False))
    return run_protocol(protocol, protocol_params(protocol, point), normalize, engine)


def run_sweep(config: dict[str, list[str]], jobs: int = 1, engine: str = "sparse") -> dict:
    protocol, grid_keys, points = sweep_points(config)
    work = [(protocol, p, engine) for p in points]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_run_point, work))
    else:
        reports = [_run_point(w) for w in work]
    return {
        "schema_version": SCHEMA_VERSION,
        "header": header(engine),
        "protocol": protocol,
        "grid_keys": grid_keys,
        "points": [
            {"index": i, "params": {k: _jsonable(v) for k, v in p.items()}, "report": r}
            for i, (p, r) in enumerate(zip(points, reports))
        ],
    }


def _jsonable(v: Any) -> Any:
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    return v


# --- argument parsing ------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ionmzi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, engine=True):
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        if engine:
            p.add_argument("--normalize", action="store_true", help="rescale unnormalized amplitude pairs")
            p.add_argument("--engine", choices=("sparse", "dense"), default="sparse", help=argparse.SUPPRESS)

    p = sub.add_parser("teleport", help="teleport alpha|m+> + beta|m->")
    p.add_argument("--alpha", type=parse_number, required=True)
    p.add_argument("--beta", type=parse_number, required=True)
    common(p)

    p = sub.add_parser("concentrate", help="entanglement concentration via swapping")
    p.add_argument("--a", type=parse_number, required=True)
    p.add_argument("--b", type=parse_number, required=True)
    p.add_argument("--alpha", type=parse_number, help="first pair coefficient (default: a)")
    p.add_argument("--beta", type=parse_number, help="first pair coefficient (default: b)")
    common(p)

    p = sub.add_parser("rsp", help="remote preparation of an entangled state")
    for name in ("a", "b", "mu", "nu"):
        p.add_argument(f"--{name}", type=parse_number, required=True)
    common(p)

    p = sub.add_parser("feasibility", help="cavity emission probability and pair rate")
    p.add_argument("--config", help="key-value file with any of the options below")
    p.add_argument("--fcav", type=_real)
    p.add_argument("--length", type=parse_length, help="cavity length, e.g. 3mm")
    p.add_argument("--wavelength", type=parse_length, help="transition wavelength, e.g. 854nm")
    p.add_argument("--dipole", type=_real, help="dipole element in C*m")
    p.add_argument("--gamma-nc", type=_real, help="non-cavity loss rate in 1/s")
    p.add_argument("--pcav", type=_real, help="use this emission probability instead of the cavity model")
    p.add_argument("--eta", type=_real)
    p.add_argument("--xi", type=_real)
    p.add_argument("--rate", type=_real, help="input photons per second")
    p.add_argument("--a2", type=_real)
    common(p, engine=False)

    p = sub.add_parser("sweep", help="run a protocol over a parameter grid")
    p.add_argument("--config", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--engine", choices=("sparse", "dense"), default="sparse", help=argparse.SUPPRESS)
    p.add_argument("--out")
    return parser


def _dispatch(args: argparse.Namespace) -> dict:
    if args.command == "teleport":
        return run_protocol("teleport", {"alpha": args.alpha, "beta": args.beta}, args.normalize, args.engine)
    if args.command == "concentrate":
        params = protocol_params("concentrate", {"a": args.a, "b": args.b, "alpha": args.alpha, "beta": args.beta})
        return run_protocol("concentrate", params, args.normalize, args.engine)
    if args.command == "rsp":
        params = {"a": args.a, "b": args.b, "mu": args.mu, "nu": args.nu}
        return run_protocol("rsp", params, args.normalize, args.engine)
    if args.command == "feasibility":
        values: dict[str, Any] = {}
        if args.config:
            for k, vals in read_config(args.config).items():
                if k not in _FEAS_KEYS or len(vals) != 1:
                    raise InputError(f"bad feasibility config entry {k!r}")
                values[k] = _convert("feasibility", k, vals[0])
        for k in _FEAS_KEYS:
            if getattr(args, k) is not None:
                values[k] = getattr(args, k)
        return run_feasibility(values)
    if args.command == "sweep":
        if args.jobs < 1:
            raise InputError("--jobs must be at least 1")
        return run_sweep(read_config(args.config), args.jobs, args.engine)
    raise InputError(f"unknown command {args.command!r}")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc = _dispatch(args)
    except InputError as exc:
        print(f"ionmzi: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConsistencyError as exc:
        print(f"ionmzi: consistency check failed: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    text = dumps(doc)
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
