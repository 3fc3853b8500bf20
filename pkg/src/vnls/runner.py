"""Execute a validated scenario and write its artifacts.

Output directory layout::

    report.json            audits, solver metadata, versions, seed, failure section
    series/*.csv           mass/energy and norm time series, decay tables
    snapshots/*.vns        binary fields every ``snapshot_stride`` frames

Everything is computed first and written at the end by a single writer.
Apart from ``timestamp``, report.json depends only on the scenario and seed.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import platform
from dataclasses import dataclass, field as dc_field
from datetime import datetime, timezone

import numpy as np
import scipy

from . import __version__
from . import admissibility as adm
from . import verification as V
from .errors import BlowupDetected, NotContracting, VNLSError
from .fields import Trajectory, lp_norm_array
from .nonlinear import duhamel_residual, picard_iterate, split_step_evolve
from .scenario import Scenario
from .snapshot import encode_vns
from .systems import component_mass_series

log = logging.getLogger(__name__)

REPORT_SCHEMA = 1

EXIT_PASS = 0
EXIT_VALIDATION = 2
EXIT_AUDIT_FAIL = 3
EXIT_RUNTIME = 4


@dataclass
class RunResult:
    exit_code: int
    report: dict
    files: dict = dc_field(default_factory=dict)  # relative path -> bytes


def _clean(value):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else repr(v)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def versions() -> dict:
    return {"vnls": __version__, "numpy": np.__version__, "scipy": scipy.__version__, "python": platform.python_version()}


def _csv(header, rows) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue().encode("utf-8")


def _series_files(traj: Trajectory, scenario: Scenario, name: str) -> dict:
    problem = scenario.problem
    masses, energies, _ = V.energy_drift_series(traj, problem)
    comps = component_mass_series(traj)
    l2 = lp_norm_array(traj.data, traj.grid, 2.0)
    linf = lp_norm_array(traj.data, traj.grid, math.inf)
    N = traj.grid.component_count
    header = ["t", "mass", "energy"] + [f"mass_{m}" for m in range(N)]
    rows = [[t, m, e, *c] for t, m, e, c in zip(traj.times, masses, energies, comps)]
    norms = [[t, a, b] for t, a, b in zip(traj.times, l2, linf)]
    return {
        f"series/{name}_mass_energy.csv": _csv(header, rows),
        f"series/{name}_norms.csv": _csv(["t", "l2", "linf"], norms),
    }


def _snapshot_files(traj: Trajectory, stride: int, name: str) -> dict:
    if stride <= 0:
        return {}
    out = {}
    for k in range(0, len(traj), stride):
        out[f"snapshots/{name}_{k:06d}.vns"] = encode_vns(traj.frame(k))
    return out


def default_t_grid(u0, params: dict, thresholds: dict) -> list[float]:
    if params["t_grid"] is not None:
        return [float(t) for t in params["t_grid"]]
    t_hi = params["t_max"] or V.wraparound_tmax(u0, thresholds["dispersive"]["spectral_mass_fraction"])
    if not math.isfinite(t_hi):
        t_hi = 1.0
    t_lo = params["t_min"] or t_hi / 4.0
    return np.geomspace(t_lo, t_hi, params["count"]).tolist()


def _run_solver(scenario: Scenario, summary: dict) -> Trajectory:
    problem = scenario.problem
    method = scenario.config["solver"]["method"]
    main = None
    if method in ("split_step", "both"):
        main = split_step_evolve(problem)
        summary["split_step"] = {"steps": problem.steps, "dt": problem.dt}
    if method in ("picard", "both"):
        traj, rep = picard_iterate(problem)
        summary["picard"] = rep.as_dict()
        summary["picard"]["duhamel_residual"] = duhamel_residual(traj, problem)
        if main is None:
            main = traj
        else:
            diff = np.max(lp_norm_array(main.data - traj.data, problem.grid, 2.0))
            summary["cross_method_difference"] = float(diff)
    summary["final_mass"] = float(V.energy_drift_series(main, problem)[0][-1])
    return main


def _run_audit(kind: str, params: dict, scenario: Scenario, traj: Trajectory | None, thresholds: dict, files: dict):
    problem = scenario.problem
    grid = scenario.grid
    A = scenario.coupling
    if kind == "conservation":
        if traj is None:
            return None
        return V.conservation_audit(traj, problem, thresholds)
    if kind == "dispersive":
        t_grid = default_t_grid(problem.u0, params, thresholds)
        audit = V.dispersive_audit(problem.u0, params["p"], params["alpha"], A, params["mu"], t_grid, thresholds)
        rep = V.fit_decay_exponent(
            problem.u0, grid.n_dims, params["p"], params["alpha"], A, params["mu"], t_grid, strict=False, thresholds=thresholds
        )
        files["series/dispersive_decay.csv"] = _csv(["t", "ratio"], zip(rep.times, rep.values))
        return audit
    if kind == "strichartz":
        pairs = params["pairs"] or [[p.q, p.r] for p in adm.default_pairs(grid.n_dims)]
        ens = V.EnsembleSpec(params["count"], params["family"], scenario.seed, grid, params["steps"], params["workers"])
        reports = [
            V.strichartz_audit(ens, adm.admissible_pair(grid.n_dims, *pair), params["s"], params["alpha"], A, params["mu"], params["T"], thresholds)
            for pair in pairs
        ]
        return reports
    if kind == "smallness":
        return V.smallness_certificate(problem, params["s"], params["alpha"], params["mu"], thresholds=thresholds)
    if kind == "chainrule":
        return V.chainrule_report(
            grid, params["p_exp"], params["alpha"], tuple(params["exponents"]), params["trials"], scenario.seed, thresholds
        )
    if kind == "lipschitz":
        return V.lipschitz_report(grid, problem.p, params["trials"], scenario.seed, thresholds)
    raise ValueError(f"unknown audit kind {kind!r}")


def execute(scenario: Scenario, thresholds: dict | None = None) -> RunResult:
    """Run solvers and audits in memory; nothing is written."""
    thresholds = thresholds or V.load_thresholds()
    cfg = scenario.config
    files: dict = {}
    solver_summary: dict = {"method": cfg["solver"]["method"]}
    failure = None
    traj = None
    needs_solver = not cfg["audits"] or "conservation" in cfg["audits"] or cfg["output"]["snapshot_stride"] > 0
    needs_solver = needs_solver or cfg["solver"]["method"] != "split_step"
    try:
        if needs_solver:
            traj = _run_solver(scenario, solver_summary)
    except (NotContracting, BlowupDetected) as exc:
        failure = {"kind": "runtime", "error": type(exc).__name__, "message": str(exc)}
        rep = getattr(exc, "report", None)
        if rep is not None:
            solver_summary["picard"] = rep.as_dict()

    audits = []
    for kind in sorted(cfg["audits"]):
        try:
            result = _run_audit(kind, cfg["audits"][kind], scenario, traj, thresholds, files)
        except VNLSError as exc:
            audits.append({"kind": kind, "pass": False, "diagnosis": f"{type(exc).__name__}: {exc}"})
            continue
        if result is None:
            audits.append({"kind": kind, "pass": False, "diagnosis": "no trajectory: solver failed"})
            continue
        for rep in result if isinstance(result, list) else [result]:
            audits.append(rep.as_dict())

    if traj is not None:
        if cfg["output"]["series"]:
            files.update(_series_files(traj, scenario, "solution"))
        files.update(_snapshot_files(traj, cfg["output"]["snapshot_stride"], "solution"))

    failed = [a["kind"] for a in audits if not a["pass"]]
    if failure is not None:
        code = EXIT_RUNTIME
        failure["failed_audits"] = failed
    elif failed:
        code = EXIT_AUDIT_FAIL
        failure = {"kind": "audit", "failed_audits": failed, "diagnoses": [a.get("diagnosis", "") for a in audits if not a["pass"]]}
    else:
        code = EXIT_PASS
    report = {
        "schema": REPORT_SCHEMA,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "versions": versions(),
        "seed": scenario.seed,
        "scenario": cfg,
        "solver": solver_summary,
        "audits": audits,
        "status": "pass" if code == EXIT_PASS else "fail",
        "exit_code": code,
        "failure": failure,
    }
    return RunResult(code, _clean(report), files)


def report_bytes(report: dict) -> bytes:
    return (json.dumps(report, indent=2, sort_keys=True) + "\n").encode("utf-8")


def write_outputs(result: RunResult, out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for rel, blob in sorted(result.files.items()):
        path = os.path.join(out_dir, rel)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        with open(path, "wb") as fh:
            fh.write(blob)
    with open(os.path.join(out_dir, "report.json"), "wb") as fh:
        fh.write(report_bytes(result.report))


def run_scenario(scenario: Scenario, out_dir=None, thresholds: dict | None = None) -> int:
    """Run and write artifacts; returns the process exit code."""
    result = execute(scenario, thresholds)
    write_outputs(result, out_dir or scenario.output_dir)
    log.info("scenario finished with exit code %d", result.exit_code)
    return result.exit_code


def validation_report(errors: list[str], seed=None) -> dict:
    return _clean(
        {
            "schema": REPORT_SCHEMA,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            "versions": versions(),
            "seed": seed,
            "audits": [],
            "status": "fail",
            "exit_code": EXIT_VALIDATION,
            "failure": {"kind": "validation", "errors": list(errors)},
        }
    )
