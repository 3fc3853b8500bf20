"""Command-line entry point ``vnls``.

Exit codes: 0 pass, 2 validation error, 3 audit failure, 4 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import admissibility as adm
from . import littlewood_paley as lp
from .errors import ParseError, ValidationError, VNLSError
from .runner import EXIT_PASS, EXIT_RUNTIME, EXIT_VALIDATION, _csv, execute, report_bytes, validation_report, write_outputs
from .scenario import apply_overrides, read_scenario_file, validate_config

VERIFY_KINDS = ("dispersive", "strichartz", "conservation", "smallness", "chainrule")

# shortcut flags and the scenario keys they set
FLAG_KEYS = {
    "n_dims": "grid.n_dims",
    "points": "grid.points_per_dim",
    "length": "grid.domain_length",
    "components": "system.N",
    "p": "problem.p",
    "lam": "problem.lambda",
    "T": "problem.T",
    "dt": "problem.dt",
    "amplitude": "problem.initial_data.amplitude",
    "family": "problem.initial_data.family",
    "solver": "solver.method",
    "seed": "seed",
    "out": "output.dir",
    "snapshot_stride": "output.snapshot_stride",
}


def _add_scenario_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("scenario", nargs="?", help="scenario JSON file (defaults are used when omitted)")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a scenario key, e.g. problem.lambda=-1 (repeatable)")
    parser.add_argument("--n-dims", dest="n_dims", type=int)
    parser.add_argument("--points", type=int, help="grid points per dimension")
    parser.add_argument("--length", type=float, help="box side length")
    parser.add_argument("--components", type=int, help="component count N")
    parser.add_argument("--p", type=float, help="nonlinearity power")
    parser.add_argument("--lambda", dest="lam", type=float, help="nonlinearity coefficient")
    parser.add_argument("--T", type=float, help="final time")
    parser.add_argument("--dt", type=float, help="time step")
    parser.add_argument("--amplitude", type=float)
    parser.add_argument("--family", choices=("gaussian", "bandlimited"))
    parser.add_argument("--solver", choices=("split_step", "picard", "both"))
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--snapshot-stride", dest="snapshot_stride", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vnls", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="criticality and solver exponents for (n, p)")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--p", required=True, help="nonlinearity power (rational, e.g. 4/3)")
    c.add_argument("--s", help="regularity to classify against s_c")

    a = sub.add_parser("admissible", help="classify an exponent pair (q, r)")
    a.add_argument("--n", type=int, required=True)
    a.add_argument("--q", required=True)
    a.add_argument("--r", required=True)

    s = sub.add_parser("simulate", help="run a scenario and write its report")
    _add_scenario_args(s)

    v = sub.add_parser("verify", help="run a single audit on a scenario")
    v.add_argument("kind", choices=VERIFY_KINDS)
    _add_scenario_args(v)

    lpp = sub.add_parser("lp", help="Littlewood-Paley tools")
    lsub = lpp.add_subparsers(dest="lp_command", required=True)
    d = lsub.add_parser("decompose", help="per-shell energies of the initial data as CSV")
    _add_scenario_args(d)
    return parser


def _print(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _cmd_classify(args) -> int:
    n, p = args.n, adm.as_exponent(args.p)
    out = {
        "n": n,
        "p": adm.format_exponent(p),
        "s_c": str(adm.critical_exponent(n, p)),
        "mass_critical": adm.is_mass_critical(n, p),
        "energy_critical": adm.is_energy_critical(n, p),
    }
    if args.s is not None:
        out["s"] = args.s
        out["regularity"] = adm.classify_regularity(args.s, n, p).value
    try:
        r, r1, sigma = adm.solver_exponents(n, p)
        out["solver_exponents"] = {"r": str(r), "r1": str(r1), "sigma": str(sigma)}
    except VNLSError as exc:
        out["solver_exponents"] = {"error": str(exc)}
    _print(out)
    return EXIT_PASS


def _cmd_admissible(args) -> int:
    q, r = adm.as_exponent(args.q), adm.as_exponent(args.r)
    cls = adm.classify_pair(args.n, q, r)
    _print({"n": args.n, "q": adm.format_exponent(q), "r": adm.format_exponent(r), "kind": cls.kind.value, "reason": cls.reason})
    return EXIT_PASS


def _raw_scenario(args, audits: dict | None = None):
    if args.scenario:
        raw, text = read_scenario_file(args.scenario)
    else:
        raw, text = {}, None
    overrides = []
    for flag, key in FLAG_KEYS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides.append((key.split("."), value))
    overrides.extend(args.overrides)
    raw = apply_overrides(raw, overrides)
    if audits is not None:
        raw["audits"] = audits
    return raw, text


def _load(args, audits=None):
    raw, text = _raw_scenario(args, audits)
    return validate_config(raw, text, args.scenario)


def _cmd_run(args, only: str | None = None) -> int:
    audits = None
    if only is not None:
        raw, _ = _raw_scenario(args)
        given = raw.get("audits") or {}
        audits = {only: given.get(only, {}) if isinstance(given, dict) else {}}
    try:
        scenario = _load(args, audits)
    except ValidationError as exc:
        _write_validation_failure(args, exc)
        raise
    result = execute(scenario)
    write_outputs(result, scenario.output_dir)
    summary = {"exit_code": result.exit_code, "output": scenario.output_dir, "audits": [
        {"kind": a["kind"], "pass": a["pass"]} for a in result.report["audits"]
    ]}
    if result.report.get("failure"):
        summary["failure"] = result.report["failure"]
    _print(summary)
    return result.exit_code


def _write_validation_failure(args, exc: ValidationError) -> None:
    """Leave a report.json with the failure section when the output dir is known."""
    try:
        raw, _ = _raw_scenario(args)
    except VNLSError:
        return
    out = (raw.get("output") or {}).get("dir") if isinstance(raw.get("output"), dict) else None
    if not isinstance(out, str) or not out:
        return
    seed = raw.get("seed")
    report = validation_report(exc.errors, seed if isinstance(seed, int) else None)
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "report.json"), "wb") as fh:
        fh.write(report_bytes(report))


def _cmd_lp(args) -> int:
    scenario = _load(args)
    bump = lp.make_dyadic_bump(scenario.grid)
    rows = lp.shell_energies(scenario.u0, bump)
    sys.stdout.write(_csv(["j", "energy"], rows).decode("utf-8"))
    return EXIT_PASS


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "classify":
            return _cmd_classify(args)
        if args.command == "admissible":
            return _cmd_admissible(args)
        if args.command == "simulate":
            return _cmd_run(args)
        if args.command == "verify":
            return _cmd_run(args, only=args.kind)
        if args.command == "lp":
            return _cmd_lp(args)
    except ValidationError as exc:
        _print(validation_report(exc.errors)["failure"])
        return EXIT_VALIDATION
    except ParseError as exc:
        _print({"kind": "parse", "message": str(exc), "line": exc.line, "column": exc.column})
        return EXIT_VALIDATION
    except VNLSError as exc:
        _print({"kind": "runtime", "error": type(exc).__name__, "message": str(exc)})
        return EXIT_RUNTIME
    parser.error(f"unknown command {args.command!r}")
    return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
