"""Nonlinear dynamics of ``i u_t + Lap u + A u + lam ||u||_E^p u = 0``.

Two independent solvers share one problem description:

* :func:`split_step_evolve` - Strang splitting, half nonlinear phase / full
  linear flow / half nonlinear phase.
* :func:`picard_iterate` - fixed-point iteration of the Duhamel map

      Phi(u)(t) = U(t) u0 - i int_0^t U(t-s) G(u(s)) ds,   G(u) = -lam ||u||^p u,

  with the time integral evaluated by the trapezoid rule on the trajectory
  grid (in the interaction picture, so the cost is O(K) transforms).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import admissibility as adm
from .errors import (
    BlowupDetected,
    DegenerateInput,
    InvalidExponent,
    NotContracting,
    ShapeMismatch,
)
from .fields import Field, Trajectory, lp_norm_array, mixed_norm_array, pointwise_norm
from .grid import GridSpec
from .propagators import CouplingMatrix, as_coupling, fractional_weight, apply_components

log = logging.getLogger(__name__)

DEFAULT_BLOWUP_FACTOR = 1e6


@dataclass(frozen=True)
class PicardConfig:
    k_max: int = 50
    tol: float = 1e-10
    damping: float = 1.0

    def __post_init__(self):
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")


@dataclass(frozen=True, eq=False)
class NLSProblem:
    """Cauchy data and discretization for one solver run."""

    grid: GridSpec
    u0: Field
    p: float
    lam: float
    T: float
    dt: float
    A: CouplingMatrix | None = None
    picard: PicardConfig = dc_field(default_factory=PicardConfig)
    blowup_factor: float = DEFAULT_BLOWUP_FACTOR

    def __post_init__(self):
        if not self.p > 0:
            raise InvalidExponent(f"nonlinearity power must be > 0, got {self.p}")
        if not (self.T > 0 and self.dt > 0):
            raise ValueError("T and dt must be positive")
        steps = self.T / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ValueError(f"dt = {self.dt} does not divide T = {self.T}")
        if self.u0.grid.shape != self.grid.shape or self.u0.grid.domain_length != self.grid.domain_length:
            raise ShapeMismatch("u0 does not live on the problem grid")
        object.__setattr__(self, "A", as_coupling(self.A, self.grid.component_count))

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.dt

    def replace(self, **changes) -> NLSProblem:
        from dataclasses import replace

        return replace(self, **changes)

    def scaled(self, amplitude: float) -> NLSProblem:
        """Same problem with ``u0`` multiplied by ``amplitude``."""
        return self.replace(u0=self.u0 * amplitude)

    @property
    def blowup_ceiling(self) -> float:
        sup = float(np.max(pointwise_norm(self.u0.samples)))
        return self.blowup_factor * max(sup, 1e-300)


@dataclass
class ContractionReport:
    iterates_used: int
    successive_distances: list[float]
    contraction_ratios: list[float]
    converged: bool
    eta_measured: float
    metric: str = ""

    def as_dict(self) -> dict:
        return {
            "iterates_used": self.iterates_used,
            "successive_distances": list(self.successive_distances),
            "contraction_ratios": list(self.contraction_ratios),
            "converged": self.converged,
            "eta_measured": self.eta_measured,
            "metric": self.metric,
        }


# ----------------------------------------------------------------------------
# pointwise maps


def _nonlinearity_array(samples: np.ndarray, p: float, lam: float) -> np.ndarray:
    mag = pointwise_norm(samples)
    # 0^p * 0 := 0
    return lam * (mag**p)[..., None] * samples


def nonlinearity(field: Field, p: float, lam: float = 1.0) -> Field:
    """``lam ||u(x)||_E^p u(x)`` at every grid point."""
    if not p > 0:
        raise InvalidExponent(f"nonlinearity power must be > 0, got {p}")
    return field.with_samples(_nonlinearity_array(field.samples, p, lam))


def lipschitz_audit(u: Field, v: Field, p: float) -> float:
    """Largest pointwise ``||F(u)-F(v)|| / (||u-v|| (||u||^p + ||v||^p))`` with ``F(u) = ||u||^p u``."""
    fu = _nonlinearity_array(u.samples, p, 1.0)
    fv = _nonlinearity_array(v.samples, p, 1.0)
    num = pointwise_norm(fu - fv)
    den = pointwise_norm(u.samples - v.samples) * (pointwise_norm(u.samples) ** p + pointwise_norm(v.samples) ** p)
    mask = den >= 1e-14
    if not np.any(mask):
        raise DegenerateInput("denominator vanishes at every grid point")
    return float(np.max(num[mask] / den[mask]))


def _phase_array(samples: np.ndarray, p: float, lam: float, dt: float) -> np.ndarray:
    if lam == 0:
        return samples
    return np.exp(1j * lam * dt * pointwise_norm(samples) ** p)[..., None] * samples


def nonlinear_phase_step(field: Field, p: float, lam: float, dt: float) -> Field:
    """Exact flow of ``i u_t + lam ||u||^p u = 0`` over ``dt``."""
    if lam == 0:
        return field
    return field.with_samples(_phase_array(field.samples, p, lam, dt))


# ----------------------------------------------------------------------------
# split-step


class _LinearStep:
    """Precomputed ``U(dt)`` acting on raw FFT coefficients."""

    def __init__(self, grid: GridSpec, A: CouplingMatrix | None, dt: float):
        self.grid = grid
        self.axes = grid.spatial_axes
        self.phase = np.exp(-1j * grid.xi_sq * dt)[..., None]
        self.group = None
        if A is not None and np.any(A.eigenvalues != 0):
            self.group = A.spectral_function(np.exp(1j * A.eigenvalues * dt)).T

    def __call__(self, samples: np.ndarray) -> np.ndarray:
        spec = np.fft.fftn(samples, axes=self.axes)
        spec *= self.phase
        out = np.fft.ifftn(spec, axes=self.axes)
        if self.group is not None:
            out = out @ self.group
        return out


def strang_steps(samples: np.ndarray, problem: NLSProblem, dt: float, steps: int, record: bool = True):
    """Advance raw samples ``steps`` Strang steps of size ``dt`` (negative allowed)."""
    grid, p, lam = problem.grid, problem.p, problem.lam
    linear = _LinearStep(grid, problem.A, dt)
    ceiling = problem.blowup_ceiling
    frames = [samples] if record else None
    u = samples
    for k in range(steps):
        u = _phase_array(u, p, lam, 0.5 * dt)
        u = linear(u)
        u = _phase_array(u, p, lam, 0.5 * dt)
        sup = float(np.max(pointwise_norm(u)))
        if not sup <= ceiling:
            raise BlowupDetected(f"sup-norm {sup:.3e} exceeded ceiling {ceiling:.3e} at step {k + 1}", (k + 1) * dt, sup)
        if record:
            frames.append(u)
    return frames if record else u


def split_step_evolve(problem: NLSProblem) -> Trajectory:
    """Strang split-step integration; every step is recorded as a frame."""
    frames = strang_steps(problem.u0.samples, problem, problem.dt, problem.steps)
    return Trajectory(
        problem.grid,
        problem.times,
        np.stack(frames),
        {"solver": "split_step", "dt": problem.dt, "steps": problem.steps},
    )


def split_step_reverse(final: Field, problem: NLSProblem) -> Field:
    """Integrate backward from ``final`` over ``[0, T]`` with step ``-dt``."""
    out = strang_steps(final.samples, problem, -problem.dt, problem.steps, record=False)
    return Field(problem.grid, out, 0.0)


# ----------------------------------------------------------------------------
# Duhamel map


class DuhamelMap:
    """Discrete Duhamel operator on the problem's time grid."""

    def __init__(self, problem: NLSProblem):
        self.problem = problem
        grid = problem.grid
        self.grid = grid
        self.axes = tuple(a for a in grid.spatial_axes)
        t = problem.times
        self.times = t
        tshape = (t.size,) + (1,) * grid.n_dims
        # E_k = exp(-i|xi|^2 t_k) exp(iA t_k) on each mode
        self.free = np.exp(-1j * grid.xi_sq[None, ...] * t.reshape(tshape))[..., None]
        self.groups = None
        A = problem.A
        if A is not None and np.any(A.eigenvalues != 0):
            vals, vecs = A.eigenvalues, A.eigenvectors
            phases = np.exp(1j * np.outer(t, vals))
            # transposed so that row-vector samples can be right-multiplied
            self.groups = np.einsum("ij,kj,lj->kli", vecs, phases, vecs.conj())
        self.u0_hat = np.fft.fftn(problem.u0.samples, axes=grid.spatial_axes)

    def _apply_group(self, spec: np.ndarray, inverse: bool) -> np.ndarray:
        if self.groups is None:
            return spec
        g = self.groups.conj().transpose(0, 2, 1) if inverse else self.groups
        flat = spec.reshape(spec.shape[0], -1, spec.shape[-1])
        out = np.einsum("kmi,kij->kmj", flat, g)
        return out.reshape(spec.shape)

    def evolve(self, spectra: np.ndarray) -> np.ndarray:
        """``E_k * spectra[k]`` for every k."""
        return self._apply_group(spectra * self.free, inverse=False)

    def linear(self) -> np.ndarray:
        """``U(t_k) u0`` for every frame."""
        spec = np.broadcast_to(self.u0_hat, (self.times.size,) + self.u0_hat.shape)
        return np.fft.ifftn(self.evolve(spec), axes=self.axes)

    def duhamel_integral_hat(self, data: np.ndarray) -> np.ndarray:
        """Trapezoid ``int_0^{t_k} U(-s) G(u(s)) ds`` in raw spectral form."""
        prob = self.problem
        g = -_nonlinearity_array(data, prob.p, prob.lam)
        g_hat = np.fft.fftn(g, axes=self.axes)
        # interaction picture: U(-t_j) G_j
        v = self._apply_group(g_hat * self.free.conj(), inverse=True)
        cum = np.zeros_like(v)
        if v.shape[0] > 1:
            cum[1:] = np.cumsum(0.5 * prob.dt * (v[1:] + v[:-1]), axis=0)
        return cum

    def __call__(self, data: np.ndarray) -> np.ndarray:
        cum = self.duhamel_integral_hat(data)
        spec = self.u0_hat[None, ...] - 1j * cum
        return np.fft.ifftn(self.evolve(spec), axes=self.axes)


def _metric_exponents(problem: NLSProblem) -> tuple[float, float, str]:
    n, p = problem.grid.n_dims, adm.as_exponent(problem.p)
    r = adm.contraction_space_exponent(n, p)
    q = float(problem.p) + 2.0
    return q, adm.to_float(r), f"L_t^{q:g} L_x^{adm.format_exponent(r)}"


def smallness_norm(problem: NLSProblem, data: np.ndarray, s: float = 0.0, alpha: float = 0.0, mu: float | None = None) -> float:
    """``|| |grad|^s (A+mu)^alpha u ||`` in ``L_t^{p+2} L_x^sigma`` for stacked frames ``data``."""
    grid = problem.grid
    q, sigma, _ = _metric_exponents(problem)
    out = data
    if s != 0:
        mult = np.zeros(grid.spatial_shape)
        nz = grid.xi_abs > 0
        mult[nz] = grid.xi_abs[nz] ** s
        out = grid.apply_multiplier(out, mult)
    weight = fractional_weight(problem.A, mu, alpha, grid.component_count)
    if weight is not None:
        out = apply_components(out, weight)
    return mixed_norm_array(out, grid, problem.dt, q, sigma)


def picard_iterate(problem: NLSProblem, s: float = 0.0, alpha: float = 0.0, mu: float | None = None):
    """Fixed-point iteration of the Duhamel map, started from the linear flow.

    Returns ``(trajectory, report)``.  Successive distances are measured in
    ``L_t^{p+2} L_x^r`` with ``r`` the sharp partner of ``p + 2``.

    Raises
    ------
    NotContracting
        Three consecutive contraction ratios above 1.
    BlowupDetected
        An iterate exceeds the sup-norm ceiling.
    """
    cfg = problem.picard
    duhamel = DuhamelMap(problem)
    q, r, metric = _metric_exponents(problem)
    ceiling = problem.blowup_ceiling
    u = duhamel.linear()
    eta = smallness_norm(problem, u, s, alpha, mu)
    distances: list[float] = []
    ratios: list[float] = []
    converged = False
    above = 0
    iterations = 0
    for k in range(cfg.k_max):
        phi = duhamel(u)
        new = phi if cfg.damping == 1.0 else (1 - cfg.damping) * u + cfg.damping * phi
        iterations = k + 1
        d = mixed_norm_array(new - u, problem.grid, problem.dt, q, r)
        distances.append(d)
        if len(distances) >= 2 and distances[-2] > 0:
            ratios.append(d / distances[-2])
            above = above + 1 if ratios[-1] > 1 else 0
        u = new
        sup = float(np.max(pointwise_norm(u))) if np.all(np.isfinite(u)) else math.inf
        if not sup <= ceiling:
            raise BlowupDetected(f"Picard iterate {k + 1} sup-norm {sup:.3e} exceeded ceiling {ceiling:.3e}", None, sup)
        if d < cfg.tol:
            converged = True
            break
        if above >= 3:
            report = ContractionReport(iterations, distances, ratios, False, eta, metric)
            raise NotContracting(
                f"contraction ratios exceeded 1 for 3 consecutive iterations (eta = {eta:.3e} too large)", report
            )
    log.debug("picard: %d iterations, converged=%s", iterations, converged)
    report = ContractionReport(iterations, distances, ratios, converged, eta, metric)
    traj = Trajectory(
        problem.grid,
        problem.times,
        u,
        {"solver": "picard", "dt": problem.dt, "steps": problem.steps, "iterations": iterations},
    )
    return traj, report


def duhamel_residual(trajectory: Trajectory, problem: NLSProblem) -> float:
    """``max_t || u(t) - Phi(u)(t) ||_{L^2}``."""
    if trajectory.data.shape != (problem.steps + 1,) + problem.grid.shape:
        raise ShapeMismatch("trajectory does not match the problem's time grid")
    phi = DuhamelMap(problem)(trajectory.data)
    return float(np.max(lp_norm_array(trajectory.data - phi, problem.grid, 2.0)))
