"""Scenario files: parsing, defaults, overrides and up-front validation.

A scenario is a JSON object.  Every section is optional; missing keys take
the defaults in :data:`DEFAULTS`.  Unknown keys are rejected with a
spelling suggestion, and all problems are collected before anything is
reported::

    {
      "grid": {"n_dims": 1, "points_per_dim": 256, "domain_length": 40.0},
      "system": {"N": 1, "matrix_kind": "diagonal", "entries": [0.0]},
      "problem": {"p": 2, "lambda": -1.0, "T": 1.0, "dt": 0.01,
                  "initial_data": {"family": "gaussian", "amplitude": 0.5}},
      "solver": {"method": "split_step"},
      "audits": {"conservation": {}},
      "seed": 0,
      "output": {"dir": "run1", "snapshot_stride": 10}
    }
"""

from __future__ import annotations

import copy
import difflib
import json
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from . import admissibility as adm
from .errors import ParseError, ValidationError, VNLSError
from .fields import Field
from .grid import GridSpec, make_grid
from .initial_data import FAMILIES, GaussianData, sample_bandlimited
from .nonlinear import NLSProblem, PicardConfig
from .propagators import CouplingMatrix
from .systems import MATRIX_KINDS, SystemSpec, build_coupling

SOLVER_METHODS = ("split_step", "picard", "both")

AUDIT_DEFAULTS: dict[str, dict[str, Any]] = {
    "conservation": {},
    "dispersive": {"p": "inf", "alpha": 0.0, "mu": None, "t_grid": None, "t_min": None, "t_max": None, "count": 13},
    "strichartz": {
        "pairs": None,
        "s": 0.0,
        "alpha": 0.0,
        "mu": None,
        "count": 20,
        "family": "gaussian",
        "T": 1.0,
        "steps": 100,
        "workers": 1,
    },
    "smallness": {"s": 0.0, "alpha": 0.0, "mu": None},
    "chainrule": {"p_exp": 2.0, "alpha": 0.5, "exponents": [4, 4, 2], "trials": 50},
    "lipschitz": {"trials": 20},
}

DEFAULTS: dict[str, Any] = {
    "grid": {"n_dims": 1, "points_per_dim": 256, "domain_length": 40.0},
    "system": {"N": 1, "matrix_kind": "diagonal", "entries": None, "hermitize": False, "mu": None},
    "problem": {
        "p": 2.0,
        "lambda": 0.0,
        "T": 1.0,
        "dt": 0.01,
        "initial_data": {
            "family": "gaussian",
            "amplitude": 1.0,
            "width": 1.0,
            "center": None,
            "velocity": None,
            "weights": None,
            "max_mode": 4,
        },
    },
    "solver": {"method": "split_step", "k_max": 50, "tol": 1e-10, "blowup_factor": 1e6},
    "audits": {},
    "seed": 0,
    "output": {"dir": "vnls_out", "snapshot_stride": 0, "series": True},
}


@dataclass
class Scenario:
    """Validated scenario with its numerical objects already built."""

    config: dict
    grid: GridSpec
    coupling: CouplingMatrix | None
    problem: NLSProblem
    audits: dict
    seed: int
    output_dir: str
    source: str | None = None

    @property
    def u0(self) -> Field:
        return self.problem.u0


# ----------------------------------------------------------------------------
# raw parsing


def _pointer(path: tuple) -> str:
    return "/" + "/".join(str(p) for p in path) if path else "/"


def _line_of_pointer(text: str, key: str) -> int | None:
    """Best-effort line number of the first ``"key":`` occurrence."""
    needle = json.dumps(key) + ":"
    for i, line in enumerate(text.splitlines(), start=1):
        if needle in line.replace('" :', '":'):
            return i
    return None


def loads_scenario(text: str, source: str | None = None) -> dict:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        where = f"{source}:" if source else ""
        raise ParseError(f"{where}{exc.lineno}:{exc.colno}: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(raw, dict):
        raise ParseError("scenario must be a JSON object", 1, 1, "/")
    return raw


def read_scenario_file(path) -> tuple[dict, str]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read scenario {path}: {exc}") from None
    return loads_scenario(text, str(path)), text


def parse_override(item: str) -> tuple[list[str], Any]:
    """``"problem.lambda=-1"`` -> (["problem", "lambda"], -1).  Values are JSON when they parse."""
    key, sep, value = item.partition("=")
    if not sep or not key.strip():
        raise ParseError(f"override {item!r} must look like key.path=value")
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError:
        parsed = value
    return key.strip().split("."), parsed


def apply_overrides(raw: dict, overrides) -> dict:
    out = copy.deepcopy(raw)
    for item in overrides or ():
        path, value = parse_override(item) if isinstance(item, str) else item
        node = out
        for part in path[:-1]:
            nxt = node.get(part)
            if not isinstance(nxt, dict):
                nxt = {}
                node[part] = nxt
            node = nxt
        node[path[-1]] = value
    return out


# ----------------------------------------------------------------------------
# defaults and key checking


def _merge(defaults: dict, given: dict, path: tuple, errors: list, text: str | None) -> dict:
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        if key not in defaults:
            close = difflib.get_close_matches(key, list(defaults), n=1)
            hint = f"; did you mean {close[0]!r}?" if close else ""
            line = _line_of_pointer(text, key) if text else None
            at = f" (line {line})" if line else ""
            errors.append(f"{_pointer(path + (key,))}: unknown key {key!r}{at}{hint}")
            continue
        sub = defaults[key]
        if isinstance(sub, dict) and sub and key != "audits":
            if not isinstance(value, dict):
                errors.append(f"{_pointer(path + (key,))}: expected an object")
                continue
            out[key] = _merge(sub, value, path + (key,), errors, text)
        else:
            out[key] = value
    return out


def _merge_audits(given, errors: list, text: str | None) -> dict:
    if isinstance(given, list):
        given = {name: {} for name in given}
    if not isinstance(given, dict):
        errors.append("/audits: expected an object keyed by audit kind")
        return {}
    out = {}
    for kind, params in given.items():
        if kind not in AUDIT_DEFAULTS:
            close = difflib.get_close_matches(kind, list(AUDIT_DEFAULTS), n=1)
            hint = f"; did you mean {close[0]!r}?" if close else ""
            errors.append(f"/audits/{kind}: unknown audit kind{hint}")
            continue
        if params is None or params is True:
            params = {}
        if not isinstance(params, dict):
            errors.append(f"/audits/{kind}: expected an object of parameters")
            continue
        out[kind] = _merge(AUDIT_DEFAULTS[kind], params, ("audits", kind), errors, text)
    return out


# ----------------------------------------------------------------------------
# field-level checks


def _is_real(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


class _Checker:
    def __init__(self):
        self.errors: list[str] = []

    def fail(self, pointer: str, message: str) -> None:
        self.errors.append(f"{pointer}: {message}")

    def real(self, pointer, value, positive=False, nonneg=False, optional=False) -> bool:
        if value is None and optional:
            return True
        if not _is_real(value):
            self.fail(pointer, f"expected a finite number, got {value!r}")
            return False
        if positive and not value > 0:
            self.fail(pointer, f"must be > 0, got {value!r}")
            return False
        if nonneg and value < 0:
            self.fail(pointer, f"must be >= 0, got {value!r}")
            return False
        return True

    def integer(self, pointer, value, minimum=None) -> bool:
        if not _is_int(value):
            self.fail(pointer, f"expected an integer, got {value!r}")
            return False
        if minimum is not None and value < minimum:
            self.fail(pointer, f"must be >= {minimum}, got {value!r}")
            return False
        return True

    def exponent(self, pointer, value):
        try:
            return adm.as_exponent(value)
        except VNLSError as exc:
            self.fail(pointer, str(exc))
            return None


def _steps_divide(T: float, dt: float) -> bool:
    ratio = T / dt
    return abs(ratio - round(ratio)) <= 1e-9 * max(1.0, ratio)


# ----------------------------------------------------------------------------
# build


def _build_initial_data(cfg: dict, grid: GridSpec, seed: int, chk: _Checker) -> Field | None:
    family = cfg["family"]
    if family not in FAMILIES:
        chk.fail("/problem/initial_data/family", f"must be one of {FAMILIES}, got {family!r}")
        return None
    amp = cfg["amplitude"]
    if isinstance(amp, list) and len(amp) == 2 and all(_is_real(v) for v in amp):
        amp = complex(amp[0], amp[1])
    elif not chk.real("/problem/initial_data/amplitude", amp):
        return None
    try:
        if family == "gaussian":
            if not chk.real("/problem/initial_data/width", cfg["width"], positive=True):
                return None
            weights = cfg["weights"]
            if weights is not None:
                weights = tuple(complex(w[0], w[1]) if isinstance(w, list) else complex(w) for w in weights)
            data = GaussianData(
                amplitude=amp,
                width=float(cfg["width"]),
                center=tuple(cfg["center"] or ()),
                velocity=tuple(cfg["velocity"] or ()),
                weights=weights or (),
            )
            return data.evaluate(grid)
        if not chk.integer("/problem/initial_data/max_mode", cfg["max_mode"], minimum=1):
            return None
        sample = sample_bandlimited(np.random.default_rng(seed), grid, cfg["max_mode"])
        return sample.evaluate(grid) * amp
    except (VNLSError, TypeError, ValueError) as exc:
        chk.fail("/problem/initial_data", str(exc))
        return None


def _check_pair(chk: _Checker, pointer: str, n: int, pair) -> None:
    if not isinstance(pair, (list, tuple)) or len(pair) != 2:
        chk.fail(pointer, f"a pair must be [q, r], got {pair!r}")
        return
    q = chk.exponent(pointer + "/0", pair[0])
    r = chk.exponent(pointer + "/1", pair[1])
    if q is None or r is None:
        return
    cls = adm.classify_pair(n, q, r)
    if not cls.admissible:
        chk.fail(pointer, f"inadmissible pair ({adm.format_exponent(q)},{adm.format_exponent(r)}): {cls.reason}")


def _check_audits(chk: _Checker, audits: dict, n: int) -> None:
    for kind, params in audits.items():
        base = f"/audits/{kind}"
        for key in ("alpha", "s"):
            if key in params:
                chk.real(f"{base}/{key}", params[key], nonneg=(key == "alpha"))
        if "mu" in params:
            chk.real(f"{base}/mu", params["mu"], optional=True)
        if kind == "dispersive":
            chk.exponent(f"{base}/p", params["p"])
            if params["t_grid"] is not None:
                tg = params["t_grid"]
                if not isinstance(tg, list) or len(tg) < 2 or not all(_is_real(t) and t > 0 for t in tg):
                    chk.fail(f"{base}/t_grid", "needs at least two positive times")
            for key in ("t_min", "t_max"):
                chk.real(f"{base}/{key}", params[key], positive=True, optional=True)
            chk.integer(f"{base}/count", params["count"], minimum=2)
        elif kind == "strichartz":
            pairs = params["pairs"]
            if pairs is not None:
                if not isinstance(pairs, list) or not pairs:
                    chk.fail(f"{base}/pairs", "expected a non-empty list of [q, r] pairs")
                else:
                    for i, pair in enumerate(pairs):
                        _check_pair(chk, f"{base}/pairs/{i}", n, pair)
            chk.integer(f"{base}/count", params["count"], minimum=1)
            chk.integer(f"{base}/steps", params["steps"], minimum=2)
            chk.integer(f"{base}/workers", params["workers"], minimum=1)
            chk.real(f"{base}/T", params["T"], positive=True)
            if params["family"] not in FAMILIES:
                chk.fail(f"{base}/family", f"must be one of {FAMILIES}")
        elif kind == "chainrule":
            chk.real(f"{base}/p_exp", params["p_exp"], positive=True)
            a = params["alpha"]
            if _is_real(a) and not 0 < a < 1:
                chk.fail(f"{base}/alpha", f"must lie in (0, 1), got {a}")
            ex = params["exponents"]
            if not isinstance(ex, list) or len(ex) != 3 or not all(_is_real(v) and 1 < v for v in ex):
                chk.fail(f"{base}/exponents", "expected [p, q, r] with each in (1, inf)")
            elif abs(1 / ex[2] - 1 / ex[0] - 1 / ex[1]) > 1e-12:
                chk.fail(f"{base}/exponents", "must satisfy 1/r = 1/p + 1/q")
            chk.integer(f"{base}/trials", params["trials"], minimum=1)
        elif kind == "lipschitz":
            chk.integer(f"{base}/trials", params["trials"], minimum=1)


def validate_config(raw: dict, text: str | None = None, source: str | None = None) -> Scenario:
    """Fill defaults, check every precondition, and build the numerical objects.

    Raises :class:`ValidationError` carrying every problem found.
    """
    key_errors: list[str] = []
    raw = dict(raw)
    audits_raw = raw.pop("audits", {})
    cfg = _merge(DEFAULTS, raw, (), key_errors, text)
    cfg["audits"] = _merge_audits(audits_raw, key_errors, text)
    chk = _Checker()
    chk.errors.extend(key_errors)

    seed = cfg["seed"]
    chk.integer("/seed", seed, minimum=0)

    g = cfg["grid"]
    grid = None
    grid_ok = [
        chk.integer("/grid/n_dims", g["n_dims"]),
        chk.integer("/grid/points_per_dim", g["points_per_dim"]),
        chk.real("/grid/domain_length", g["domain_length"], positive=True),
    ]
    if all(grid_ok):
        N = cfg["system"]["N"]
        try:
            grid = make_grid(g["n_dims"], g["points_per_dim"], float(g["domain_length"]), N if _is_int(N) else 1)
        except VNLSError as exc:
            chk.fail("/grid", str(exc))

    s = cfg["system"]
    coupling = None
    chk.real("/system/mu", s["mu"], optional=True)
    if s["matrix_kind"] not in MATRIX_KINDS:
        chk.fail("/system/matrix_kind", f"must be one of {MATRIX_KINDS}, got {s['matrix_kind']!r}")
    elif not isinstance(s["hermitize"], bool):
        chk.fail("/system/hermitize", "expected true or false")
    else:
        try:
            spec = SystemSpec(s["N"], s["matrix_kind"], s["entries"], s["hermitize"], s["mu"])
            coupling = build_coupling(spec)
        except VNLSError as exc:
            chk.fail("/system", str(exc))

    pr = cfg["problem"]
    chk.real("/problem/p", pr["p"], positive=True)
    chk.real("/problem/lambda", pr["lambda"])
    T_ok = chk.real("/problem/T", pr["T"], positive=True)
    dt_ok = chk.real("/problem/dt", pr["dt"], positive=True)
    if T_ok and dt_ok and not _steps_divide(pr["T"], pr["dt"]):
        chk.fail("/problem/dt", f"dt = {pr['dt']} does not divide T = {pr['T']}")

    sv = cfg["solver"]
    if sv["method"] not in SOLVER_METHODS:
        chk.fail("/solver/method", f"must be one of {SOLVER_METHODS}, got {sv['method']!r}")
    chk.integer("/solver/k_max", sv["k_max"], minimum=1)
    chk.real("/solver/tol", sv["tol"], positive=True)
    chk.real("/solver/blowup_factor", sv["blowup_factor"], positive=True)

    out = cfg["output"]
    if not isinstance(out["dir"], str) or not out["dir"]:
        chk.fail("/output/dir", "expected a non-empty path")
    chk.integer("/output/snapshot_stride", out["snapshot_stride"], minimum=0)
    if not isinstance(out["series"], bool):
        chk.fail("/output/series", "expected true or false")

    n = grid.n_dims if grid else (g["n_dims"] if _is_int(g["n_dims"]) else 1)
    _check_audits(chk, cfg["audits"], n)

    u0 = None
    if grid is not None and _is_int(seed):
        u0 = _build_initial_data(pr["initial_data"], grid, seed, chk)

    problem = None
    if not chk.errors:
        try:
            problem = NLSProblem(
                grid,
                u0,
                float(pr["p"]),
                float(pr["lambda"]),
                float(pr["T"]),
                float(pr["dt"]),
                A=coupling,
                picard=PicardConfig(k_max=sv["k_max"], tol=float(sv["tol"])),
                blowup_factor=float(sv["blowup_factor"]),
            )
        except VNLSError as exc:
            chk.fail("/problem", str(exc))
    if chk.errors:
        raise ValidationError(chk.errors)
    return Scenario(cfg, grid, coupling, problem, cfg["audits"], seed, out["dir"], source)


def parse_scenario(path, overrides=()) -> Scenario:
    """Read, override and validate a scenario file."""
    raw, text = read_scenario_file(path)
    return validate_config(apply_overrides(raw, overrides), text, str(path))


def scenario_from_dict(raw: dict, overrides=()) -> Scenario:
    return validate_config(apply_overrides(raw, overrides))
