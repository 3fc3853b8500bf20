"""Numerical audits of the dispersive, Strichartz, conservation and smallness estimates.

An inequality with an unspecified constant cannot be verified outright.  The
audits here check what can be measured: scaling exponents, and empirical
constants that stay bounded and stable under ensemble growth and grid
refinement.  Every threshold comes from ``thresholds.json``; an
:class:`AuditReport` carries both its quantities and the thresholds they
were compared against, so ``passed`` can be recomputed from the report alone.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from functools import lru_cache
from importlib import resources
from typing import Sequence

import numpy as np

from . import admissibility as adm
from . import littlewood_paley as lp
from .errors import BlowupDetected, NotContracting, WindowInvalid
from .fields import Field, Trajectory, energy_density_terms, lp_norm_array, mass, mixed_norm_array, strichartz_norm
from .grid import GridSpec
from .initial_data import random_smooth_field, sample_family
from .nonlinear import NLSProblem, lipschitz_audit, picard_iterate, smallness_norm
from .propagators import as_coupling, apply_components, dispersive_ratio, fractional_weight, free_multiplier, matrix_group


@lru_cache(maxsize=None)
def _load_default_thresholds() -> str:
    return resources.files("vnls").joinpath("thresholds.json").read_text(encoding="utf-8")


def load_thresholds(path=None) -> dict:
    """Frozen audit thresholds (a fresh copy each call)."""
    if path is None:
        return json.loads(_load_default_thresholds())
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# ----------------------------------------------------------------------------
# reports


def evaluate_checks(quantities: dict, thresholds: dict) -> bool:
    """Threshold keys are ``max:<name>`` (quantity <= value) or ``min:<name>`` (quantity >= value)."""
    for key, limit in thresholds.items():
        op, _, name = key.partition(":")
        value = quantities.get(name)
        if value is None or not isinstance(value, (int, float)) or math.isnan(value):
            return False
        if op == "max" and not value <= limit:
            return False
        if op == "min" and not value >= limit:
            return False
        if op not in ("max", "min"):
            raise ValueError(f"unknown threshold operator in {key!r}")
    return True


AUDIT_KINDS = ("dispersive", "strichartz", "conservation", "smallness", "chainrule", "lipschitz")


@dataclass
class AuditReport:
    kind: str
    inputs_digest: dict
    quantities: dict
    thresholds: dict
    passed: bool = dc_field(init=False)
    notes: list = dc_field(default_factory=list)
    diagnosis: str = ""

    def __post_init__(self):
        if self.kind not in AUDIT_KINDS:
            raise ValueError(f"unknown audit kind {self.kind!r}")
        self.passed = self.recompute_pass()

    def recompute_pass(self) -> bool:
        return evaluate_checks(self.quantities, self.thresholds)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "inputs": self.inputs_digest,
            "quantities": self.quantities,
            "thresholds": self.thresholds,
            "pass": self.passed,
            "notes": list(self.notes),
            "diagnosis": self.diagnosis,
        }


@dataclass
class DecayFitReport:
    times: list
    values: list
    fitted_slope: float
    expected_slope: float
    r_squared: float
    window_valid: bool
    t_max: float
    passed: bool

    def as_audit(self, digest: dict, thresholds: dict | None = None) -> AuditReport:
        cfg = (thresholds or load_thresholds())["dispersive"]
        quantities = {
            "fitted_slope": self.fitted_slope,
            "expected_slope": self.expected_slope,
            "slope_error": abs(self.fitted_slope - self.expected_slope),
            "r_squared": self.r_squared,
            "window_valid": 1.0 if self.window_valid else 0.0,
        }
        checks = {"min:window_valid": 1.0, "max:slope_error": _slope_tolerance(self.expected_slope, cfg)}
        if self.expected_slope != 0:
            checks["min:r_squared"] = cfg["min_r_squared"]
        return AuditReport("dispersive", digest, quantities, checks)


def _slope_tolerance(expected: float, cfg: dict) -> float:
    if expected == 0:
        return cfg["zero_slope_tol"]
    return cfg["rel_slope_tol"] * abs(expected)


# ----------------------------------------------------------------------------
# dispersive decay


def effective_frequency(field: Field, fraction: float = 0.999) -> float:
    """Radius ``|xi|`` holding ``fraction`` of the spectral mass."""
    g = field.grid
    power = np.sum(np.abs(np.fft.fftn(field.samples, axes=g.spatial_axes)) ** 2, axis=-1).ravel()
    radius = g.xi_abs.ravel()
    order = np.argsort(radius, kind="stable")
    cum = np.cumsum(power[order])
    if cum[-1] == 0:
        return 0.0
    idx = int(np.searchsorted(cum, fraction * cum[-1]))
    return float(radius[order][min(idx, radius.size - 1)])


def wraparound_tmax(field: Field, fraction: float = 0.999) -> float:
    """Largest time for which group velocity ``2|xi|`` does not cross a quarter box."""
    xi = effective_frequency(field, fraction)
    return math.inf if xi == 0 else field.grid.domain_length / (4.0 * xi)


def _linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - float(np.sum(resid**2)) / ss_tot)
    return float(slope), min(r2, 1.0)


def fit_decay_exponent(
    u0: Field,
    n: int,
    p,
    alpha: float = 0.0,
    A=None,
    mu: float | None = None,
    t_grid: Sequence[float] = (),
    strict: bool = True,
    thresholds: dict | None = None,
) -> DecayFitReport:
    """Least-squares slope of ``log dispersive_ratio`` against ``log t``.

    Raises :class:`WindowInvalid` (``strict``) when ``t_grid`` leaves the
    wraparound-safe window.
    """
    cfg = (thresholds or load_thresholds())["dispersive"]
    if n != u0.grid.n_dims:
        raise ValueError(f"n = {n} disagrees with the grid dimension {u0.grid.n_dims}")
    times = np.asarray(sorted(float(t) for t in t_grid))
    if times.size < 2 or np.any(times <= 0) or np.any(np.diff(times) <= 0):
        raise ValueError("t_grid needs at least two distinct positive times")
    t_max = wraparound_tmax(u0, cfg["spectral_mass_fraction"])
    valid = bool(times[-1] <= t_max)
    if strict and not valid:
        raise WindowInvalid(f"t = {times[-1]:g} beyond wraparound-safe window t_max = {t_max:g}")
    values = np.array([dispersive_ratio(u0, t, p, A, alpha, mu) for t in times])
    slope, r2 = _linear_fit(np.log(times), np.log(values))
    inv_p = adm.reciprocal(adm.as_exponent(p))
    expected = -(n * (0.5 - float(inv_p)) + alpha)
    tol = _slope_tolerance(expected, cfg)
    ok = valid and abs(slope - expected) <= tol and (expected == 0 or r2 >= cfg["min_r_squared"])
    return DecayFitReport(times.tolist(), values.tolist(), slope, expected, r2, valid, t_max, bool(ok))


def dispersive_audit(u0: Field, p, alpha=0.0, A=None, mu=None, t_grid=(), thresholds=None) -> AuditReport:
    rep = fit_decay_exponent(u0, u0.grid.n_dims, p, alpha, A, mu, t_grid, strict=False, thresholds=thresholds)
    digest = {"n": u0.grid.n_dims, "p": adm.format_exponent(adm.as_exponent(p)), "alpha": alpha, "mu": mu, "t_grid": rep.times}
    audit = rep.as_audit(digest, thresholds)
    audit.quantities["t_max"] = rep.t_max
    if alpha:
        audit.notes.append(
            "for a bounded matrix A, (A+mu)^alpha exp(iAt) has t-independent norm; alpha cannot change the measured slope"
        )
    return audit


# ----------------------------------------------------------------------------
# Strichartz ensembles


@dataclass(frozen=True)
class EnsembleSpec:
    count: int
    family: str
    seed: int
    grid: GridSpec
    steps: int = 200
    workers: int = 1


def linear_trajectory(u0: Field, A, T: float, steps: int) -> Trajectory:
    """``U(t_k) u0`` on ``steps + 1`` uniform times in ``[0, T]``."""
    g = u0.grid
    A = as_coupling(A, g.component_count)
    times = np.linspace(0.0, T, steps + 1)
    spec = np.fft.fftn(u0.samples, axes=g.spatial_axes)
    data = np.empty((times.size,) + g.shape, dtype=complex)
    for k, t in enumerate(times):
        out = np.fft.ifftn(spec * free_multiplier(g, t)[..., None], axes=g.spatial_axes)
        if A is not None:
            out = apply_components(out, matrix_group(A, t))
        data[k] = out
    return Trajectory(g, times, data)


def homogeneous_derivative_array(data: np.ndarray, grid: GridSpec, s: float) -> np.ndarray:
    if s == 0:
        return data
    mult = np.zeros(grid.spatial_shape)
    nz = grid.xi_abs > 0
    mult[nz] = grid.xi_abs[nz] ** s
    return grid.apply_multiplier(data, mult)


def strichartz_quotient(u0: Field, pair: adm.AdmissiblePair, s, alpha, A, mu, T, steps) -> float:
    g = u0.grid
    traj = linear_trajectory(u0, A, T, steps)
    num = mixed_norm_array(homogeneous_derivative_array(traj.data, g, s), g, traj.dt, pair.q_float, pair.r_float)
    weighted = homogeneous_derivative_array(u0.samples, g, s)
    w = fractional_weight(A, mu, alpha, g.component_count)
    if w is not None:
        weighted = apply_components(weighted, w)
    den = float(lp_norm_array(weighted, g, 2.0))
    return num / den


def _ensemble_quotients(ens: EnsembleSpec, grid: GridSpec, pair, s, alpha, A, mu, T) -> list[float]:
    rng = np.random.default_rng(ens.seed)
    samples = [sample_family(ens.family, rng, ens.grid) for _ in range(ens.count)]

    def one(sample):
        return strichartz_quotient(sample.evaluate(grid), pair, s, alpha, A, mu, T, ens.steps)

    if ens.workers > 1:
        with ThreadPoolExecutor(max_workers=ens.workers) as pool:
            return list(pool.map(one, samples))
    return [one(x) for x in samples]


def strichartz_audit(ensemble: EnsembleSpec, pair, s=0.0, alpha=0.0, A=None, mu=None, T=1.0, thresholds=None) -> AuditReport:
    """Quotient ``|| |grad|^s u ||_{L^q L^r} / || |grad|^s (A+mu)^alpha u0 ||_2`` over an ensemble."""
    cfg = (thresholds or load_thresholds())["strichartz"]
    n = ensemble.grid.n_dims
    if not isinstance(pair, adm.AdmissiblePair):
        pair = adm.admissible_pair(n, *pair)
    A = as_coupling(A, ensemble.grid.component_count)
    base = _ensemble_quotients(ensemble, ensemble.grid, pair, s, alpha, A, mu, T)
    refined = _ensemble_quotients(ensemble, ensemble.grid.refined(), pair, s, alpha, A, mu, T)
    qmax, qmax_ref = max(base), max(refined)
    quantities = {
        "max_quotient": qmax,
        "median_quotient": float(np.median(base)),
        "max_quotient_refined": qmax_ref,
        "refinement_change": abs(qmax - qmax_ref) / qmax,
    }
    checks = {"max:max_quotient": cfg["max_quotient"], "max:refinement_change": cfg["refinement_change"]}
    digest = {
        "pair": pair.label(),
        "kind": pair.kind.value,
        "s": s,
        "alpha": alpha,
        "mu": mu,
        "T": T,
        "count": ensemble.count,
        "family": ensemble.family,
        "seed": ensemble.seed,
        "steps": ensemble.steps,
    }
    report = AuditReport("strichartz", digest, quantities, checks)
    if pair.is_endpoint:
        report.notes.append("endpoint pair: time discretization of L_t^2 is delicate, result is indicative only")
    return report


# ----------------------------------------------------------------------------
# conservation


def energy_drift_series(trajectory: Trajectory, problem: NLSProblem) -> tuple[np.ndarray, np.ndarray, float]:
    """Mass and energy per frame, plus the magnitude scale used to normalize energy drift."""
    g = trajectory.grid
    masses = np.empty(len(trajectory))
    energies = np.empty(len(trajectory))
    scale = 0.0
    for k in range(len(trajectory)):
        kin, coup, pot = energy_density_terms(trajectory.data[k], g, problem.p, problem.lam, problem.A)
        energies[k] = 0.5 * kin - 0.5 * coup - problem.lam / (problem.p + 2.0) * pot
        masses[k] = g.cell_volume * float(np.sum(np.abs(trajectory.data[k]) ** 2))
        if k == 0:
            scale = 0.5 * kin + 0.5 * abs(coup) + abs(problem.lam) / (problem.p + 2.0) * pot
    return masses, energies, scale


def conservation_audit(trajectory: Trajectory, problem: NLSProblem, thresholds=None) -> AuditReport:
    """Relative mass drift and normalized energy drift against ``c dt^2``."""
    cfg = (thresholds or load_thresholds())["conservation"]
    masses, energies, scale = energy_drift_series(trajectory, problem)
    m0 = masses[0]
    mass_drift = float(np.max(np.abs(masses - m0)) / m0) if m0 > 0 else 0.0
    energy_drift = float(np.max(np.abs(energies - energies[0])) / scale) if scale > 0 else 0.0
    dt = trajectory.dt
    quantities = {"mass_drift": mass_drift, "energy_drift": energy_drift, "dt": dt}
    checks = {
        "max:mass_drift": cfg["mass_drift"],
        "max:energy_drift": max(cfg["energy_dt2_constant"] * dt**2, cfg["energy_floor"]),
    }
    digest = {"p": problem.p, "lambda": problem.lam, "T": problem.T, "dt": problem.dt, "frames": len(trajectory)}
    return AuditReport("conservation", digest, quantities, checks)


# ----------------------------------------------------------------------------
# smallness certificate


def _weighted_data(data: np.ndarray, problem: NLSProblem, s: float, alpha: float, mu) -> np.ndarray:
    out = homogeneous_derivative_array(data, problem.grid, s)
    w = fractional_weight(problem.A, mu, alpha, problem.grid.component_count)
    return out if w is None else apply_components(out, w)


def smallness_certificate(problem: NLSProblem, s=0.0, alpha=0.0, mu=None, pairs=None, thresholds=None) -> AuditReport:
    """Linear smallness ``eta``, a Picard solve, and the a-posteriori bounds.

    Quantities: ``eta`` of the linear flow; ``eta_ratio`` = solution norm /
    ``eta`` (bounded by 2); ``bound_regularity`` and ``bound_weighted`` are the S^0-type
    quotients compared with frozen constants.
    """
    cfg = (thresholds or load_thresholds())["smallness"]
    g = problem.grid
    digest = {"s": s, "alpha": alpha, "mu": mu, "p": problem.p, "lambda": problem.lam, "T": problem.T, "dt": problem.dt}
    checks = {
        "max:eta_ratio": cfg["eta_factor"],
        "max:bound_regularity": cfg["strichartz_regularity"],
        "max:bound_weighted": cfg["strichartz_weighted"],
        "min:converged": 1.0,
    }
    try:
        traj, report = picard_iterate(problem, s, alpha, mu)
    except (NotContracting, BlowupDetected) as exc:
        rep = getattr(exc, "report", None)
        quantities = {"eta": rep.eta_measured if rep else float("nan"), "converged": 0.0}
        audit = AuditReport("smallness", digest, quantities, checks)
        audit.diagnosis = f"{type(exc).__name__}: eta too large ({exc})"
        return audit
    eta = report.eta_measured
    eta_sol = smallness_norm(problem, traj.data, s, alpha, mu)
    u0 = problem.u0.samples
    grad_u = traj.map_frames(lambda d: homogeneous_derivative_array(d, g, s))
    weighted_u = traj.map_frames(lambda d: _weighted_data(d, problem, s, alpha, mu))
    alpha_only = traj.map_frames(lambda d: _weighted_data(d, problem, 0.0, alpha, mu))
    s0_grad = strichartz_norm(grad_u, pairs).value
    c0 = float(np.max(lp_norm_array(weighted_u.data, g, 2.0)))
    rhs_reg = float(lp_norm_array(_weighted_data(u0, problem, s, alpha, mu), g, 2.0)) + eta ** (1 + problem.p)
    s0_alpha = strichartz_norm(alpha_only, pairs).value
    rhs_weighted = float(lp_norm_array(_weighted_data(u0, problem, 0.0, alpha, mu), g, 2.0))
    quantities = {
        "eta": eta,
        "eta_solution": eta_sol,
        "eta_ratio": eta_sol / eta if eta > 0 else 0.0,
        "bound_regularity": (s0_grad + c0) / rhs_reg if rhs_reg > 0 else 0.0,
        "bound_weighted": s0_alpha / rhs_weighted if rhs_weighted > 0 else 0.0,
        "converged": 1.0 if report.converged else 0.0,
        "iterations": float(report.iterates_used),
        "max_contraction_ratio": max(report.contraction_ratios) if report.contraction_ratios else 0.0,
    }
    audit = AuditReport("smallness", digest, quantities, checks)
    audit.notes.append("S^0 norms are maxima over a finite sample of admissible pairs")
    return audit


def amplitude_scan(problem: NLSProblem, amplitudes: Sequence[float]) -> list[tuple[float, bool]]:
    """Whether Picard contracts for ``u0`` scaled by each amplitude."""
    return [(float(a), _contracts(problem.scaled(a))) for a in amplitudes]


def _contracts(problem: NLSProblem) -> bool:
    try:
        _, rep = picard_iterate(problem)
    except (NotContracting, BlowupDetected):
        return False
    return rep.converged


def contraction_threshold(problem: NLSProblem, lo: float, hi: float, iterations: int = 20) -> tuple[float, float]:
    """Bisect the amplitude at which Picard stops contracting.

    Requires convergence at ``lo`` and failure at ``hi``; returns the final
    bracket ``(last contracting, first failing)``.
    """
    if not _contracts(problem.scaled(lo)):
        raise ValueError(f"Picard does not contract at the lower amplitude {lo}")
    if _contracts(problem.scaled(hi)):
        raise ValueError(f"Picard still contracts at the upper amplitude {hi}")
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if _contracts(problem.scaled(mid)):
            lo = mid
        else:
            hi = mid
    return lo, hi


# ----------------------------------------------------------------------------
# pointwise / harmonic-analysis audits


def lipschitz_report(grid: GridSpec, p: float, trials: int, seed: int, thresholds=None) -> AuditReport:
    cfg = (thresholds or load_thresholds())["lipschitz"]
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        u = Field(grid, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))
        v = Field(grid, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))
        worst = max(worst, lipschitz_audit(u, v, p))
    limit = lipschitz_constant(p, cfg)
    return AuditReport("lipschitz", {"p": p, "trials": trials, "seed": seed}, {"max_ratio": worst}, {"max:max_ratio": limit})


def lipschitz_constant(p: float, cfg: dict) -> float:
    """Frozen bound: ``max(1, (p+1)/2)`` plus the configured margin."""
    return max(1.0, (p + 1.0) / 2.0) + cfg["margin"]


def chainrule_report(
    grid: GridSpec,
    p_exp: float,
    alpha: float,
    exps: tuple[float, float, float],
    trials: int,
    seed: int,
    thresholds=None,
) -> AuditReport:
    cfg = (thresholds or load_thresholds())["chainrule"]
    rng = np.random.default_rng(seed)
    p, q, r = exps
    ratios = []
    scale_dev = 0.0
    for _ in range(trials):
        u = random_smooth_field(grid, rng)
        ratio = lp.chain_rule_ratio(u, p_exp, alpha, p, q, r)
        c = complex(rng.uniform(0.1, 10.0) * np.exp(2j * np.pi * rng.random()))
        scaled = lp.chain_rule_ratio(u * c, p_exp, alpha, p, q, r)
        scale_dev = max(scale_dev, abs(scaled - ratio) / ratio)
        ratios.append(ratio)
    quantities = {"max_ratio": max(ratios), "median_ratio": float(np.median(ratios)), "scale_deviation": scale_dev}
    checks = {"max:max_ratio": cfg["max_ratio"], "max:scale_deviation": cfg["scale_deviation"]}
    digest = {"p_exp": p_exp, "alpha": alpha, "p": p, "q": q, "r": r, "trials": trials, "seed": seed}
    return AuditReport("chainrule", digest, quantities, checks)


def maximal_ratio_sample(grid: GridSpec, p: float, trials: int, seed: int) -> list[float]:
    """``||Mf||_p / ||f||_p`` over random smooth fields."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(trials):
        f = random_smooth_field(grid, rng)
        out.append(lp.scalar_lp_norm(lp.maximal_function(f), grid, p) / float(lp_norm_array(f.samples, grid, p)))
    return out


def square_function_ratio_sample(grid: GridSpec, p: float, trials: int, seed: int) -> list[float]:
    """``||S f||_p / ||f||_p`` over random mean-zero fields."""
    rng = np.random.default_rng(seed)
    bump = lp.make_dyadic_bump(grid)
    out = []
    for _ in range(trials):
        f = random_smooth_field(grid, rng)
        out.append(lp.square_function_norm(f, p, bump) / float(lp_norm_array(f.samples, grid, p)))
    return out


def relative_mass_drift(trajectory: Trajectory) -> float:
    masses = [mass(f) for f in trajectory.frames]
    return max(abs(m - masses[0]) for m in masses) / masses[0]
