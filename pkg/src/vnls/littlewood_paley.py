"""Dyadic frequency decomposition, fractional derivatives and the maximal operator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DegenerateInput, GridTooSmall, InvalidExponent, MeanNotZero, OutOfRange
from .fields import Field, _check_p, lp_norm_array, pointwise_norm
from .grid import GridSpec

LOOKUP_SAMPLES = 4096


def _ramp(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x, dtype=float)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def smooth_cutoff_exact(r: np.ndarray) -> np.ndarray:
    """C-infinity cutoff: 1 on [0, 1], 0 on [2, inf)."""
    r = np.asarray(r, dtype=float)
    a = _ramp(2.0 - r)
    b = _ramp(r - 1.0)
    return a / (a + b)


class _CutoffTable:
    """Frozen lookup of the cutoff bridge on [1, 2] with cubic interpolation."""

    def __init__(self, samples: int = LOOKUP_SAMPLES):
        nodes = np.linspace(1.0, 2.0, samples)
        self.nodes = nodes
        self.values = smooth_cutoff_exact(nodes)
        self.spline = CubicSpline(nodes, self.values, bc_type="clamped")

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        out = np.where(r <= 1.0, 1.0, 0.0)
        bridge = (r > 1.0) & (r < 2.0)
        if np.any(bridge):
            out = out.astype(float)
            out[bridge] = np.clip(self.spline(r[bridge]), 0.0, 1.0)
        return out


_CUTOFF = _CutoffTable()


def smooth_cutoff(r) -> np.ndarray:
    return _CUTOFF(r)


def eta(r) -> np.ndarray:
    """Annular bump ``phi(|xi|) - phi(2|xi|)``, supported in ``1/2 < |xi| < 2``."""
    r = np.abs(np.asarray(r, dtype=float))
    return smooth_cutoff(r) - smooth_cutoff(2.0 * r)


@dataclass(frozen=True)
class DyadicBump:
    """Dyadic partition ``sum_j eta(2^-j xi) = 1`` on the grid's nonzero frequencies."""

    grid: GridSpec
    j_min: int
    j_max: int
    lookup: np.ndarray

    @property
    def j_range(self) -> range:
        return range(self.j_min, self.j_max + 1)

    def __call__(self, r) -> np.ndarray:
        return eta(r)

    def shell_multiplier(self, j: int) -> np.ndarray:
        if j not in self.j_range:
            raise OutOfRange(f"shell {j} outside [{self.j_min}, {self.j_max}]")
        return eta(self.grid.xi_abs * 2.0 ** (-j))

    def partition_sum(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        return sum(eta(r * 2.0 ** (-j)) for j in self.j_range)


def make_dyadic_bump(grid: GridSpec) -> DyadicBump:
    """Choose shells so the annuli cover every nonzero grid frequency."""
    xi = grid.xi_abs
    nonzero = xi[xi > 0]
    lo, hi = float(nonzero.min()), float(nonzero.max())
    # need 2^(1-j_min) lo >= 2 and 2^(-j_max) hi <= 1
    j_min = math.floor(math.log2(lo) + 1e-12)
    j_max = math.ceil(math.log2(hi) - 1e-12)
    if j_max - j_min + 1 < 2:
        raise GridTooSmall(f"only {j_max - j_min + 1} dyadic shell(s) fit this grid")
    return DyadicBump(grid, j_min, j_max, _CUTOFF.values.copy())


def lp_project(field: Field, j: int, bump: DyadicBump) -> Field:
    """``Q_j u``: Fourier multiplier ``eta(2^-j xi)``."""
    return field.with_samples(field.grid.apply_multiplier(field.samples, bump.shell_multiplier(j)))


def lp_shells(samples: np.ndarray, grid: GridSpec, bump: DyadicBump) -> np.ndarray:
    """All projections stacked on a new leading axis (one per shell)."""
    spec = np.fft.fftn(samples, axes=grid.spatial_axes)
    out = np.empty((len(bump.j_range),) + samples.shape, dtype=complex)
    for i, j in enumerate(bump.j_range):
        out[i] = np.fft.ifftn(spec * bump.shell_multiplier(j)[..., None], axes=grid.spatial_axes)
    return out


def shell_energies(field: Field, bump: DyadicBump) -> list[tuple[int, float]]:
    """``(j, ||Q_j u||_2^2)`` per shell."""
    shells = lp_shells(field.samples, field.grid, bump)
    return [(j, float(lp_norm_array(s, field.grid, 2.0)) ** 2) for j, s in zip(bump.j_range, shells)]


def _has_mean(field: Field) -> bool:
    mean = np.abs(field.mean())
    scale = max(float(np.max(np.abs(field.samples))), 1e-300)
    return bool(np.any(mean > 1e-12 * scale))


def fractional_derivative(field: Field, s: float) -> Field:
    """``D^s = |grad|^s`` with the zero mode sent to 0 (s > 0) or rejected (s < 0, nonzero mean)."""
    g = field.grid
    if s == 0:
        return field
    if s < 0 and _has_mean(field):
        raise MeanNotZero("negative-order derivative of a field with nonzero mean")
    mult = np.zeros(g.spatial_shape)
    nz = g.xi_abs > 0
    mult[nz] = g.xi_abs[nz] ** s
    return field.with_samples(g.apply_multiplier(field.samples, mult))


def _ball_offsets_kernel(grid: GridSpec, radius_cells: float) -> np.ndarray:
    """Indicator of the periodic discrete open ball ``|k| < radius`` in index units."""
    m = grid.points_per_dim
    k = np.fft.fftfreq(m) * m
    dist_sq = np.zeros(grid.spatial_shape)
    for axis in range(grid.n_dims):
        shape = [1] * grid.n_dims
        shape[axis] = m
        dist_sq = dist_sq + (k.reshape(shape)) ** 2
    return (dist_sq < radius_cells**2).astype(float)


def radius_ladder(grid: GridSpec) -> list[float]:
    """``h, 2h, 4h, ..., L/2``; the radius-h ball holds only the centre cell."""
    out = []
    r = grid.h
    while r <= grid.domain_length / 2 * (1 + 1e-12):
        out.append(r)
        r *= 2
    return out


def maximal_function(field: Field) -> np.ndarray:
    """Centred Hardy-Littlewood maximal function of ``||f||_E`` over the radius ladder."""
    g = field.grid
    mag = pointwise_norm(field.samples)
    result = mag.copy()
    mag_hat = np.fft.rfftn(mag)
    for r in radius_ladder(g)[1:]:
        kernel = _ball_offsets_kernel(g, r / g.h)
        kernel /= kernel.sum()
        avg = np.fft.irfftn(mag_hat * np.fft.rfftn(kernel), s=mag.shape, axes=tuple(range(mag.ndim)))
        np.maximum(result, avg, out=result)
    return result


def scalar_lp_norm(values: np.ndarray, grid: GridSpec, p: float) -> float:
    return float(lp_norm_array(np.asarray(values)[..., None], grid, p))


def square_function(field: Field, bump: DyadicBump) -> np.ndarray:
    """Pointwise ``(sum_j ||Q_j f(x)||_E^2)^(1/2)``."""
    shells = lp_shells(field.samples, field.grid, bump)
    return np.sqrt(np.sum(pointwise_norm(shells) ** 2, axis=0))


def square_function_norm(field: Field, p, bump: DyadicBump) -> float:
    """L^p norm of the Littlewood-Paley square function (mean-zero fields)."""
    p = _check_p(p)
    if not 1 < p < math.inf:
        raise InvalidExponent(f"square function norm needs p in (1, inf), got {p}")
    if _has_mean(field):
        raise MeanNotZero("square function equivalence applies to mean-zero fields")
    return scalar_lp_norm(square_function(field, bump), field.grid, p)


def chain_rule_ratio(u: Field, p_exp: float, alpha: float, p, q, r, bump: DyadicBump | None = None) -> float:
    """``||D^a F(u)||_r / (||F'(u)||_p ||D^a u||_q)`` for ``F(u) = ||u||^p_exp u``.

    ``F'(u)`` is measured pointwise as ``(1 + p_exp) ||u||^p_exp``.  When a
    bump is supplied, ``D^a`` norms use the square-function form
    ``(sum_j 4^(j a) ||Q_j f||^2)^(1/2)`` instead of the multiplier.
    """
    if not 0 < alpha < 1:
        raise InvalidExponent(f"alpha must lie in (0, 1), got {alpha}")
    p, q, r = _check_p(p), _check_p(q), _check_p(r)
    for name, val in (("p", p), ("q", q), ("r", r)):
        if not 1 < val < math.inf:
            raise InvalidExponent(f"{name} must lie in (1, inf), got {val}")
    if abs(1 / r - (1 / p + 1 / q)) > 1e-12:
        raise InvalidExponent("exponents must satisfy 1/r = 1/p + 1/q")
    g = u.grid
    mag = pointwise_norm(u.samples)
    fu = u.with_samples((mag**p_exp)[..., None] * u.samples)
    deriv_norm = _dyadic_derivative_norm if bump is not None else _multiplier_derivative_norm
    num = deriv_norm(fu, alpha, r, bump)
    fprime = scalar_lp_norm((1.0 + p_exp) * mag**p_exp, g, p)
    du = deriv_norm(u, alpha, q, bump)
    if fprime < 1e-14 or du < 1e-14:
        raise DegenerateInput("denominator factor below 1e-14")
    ratio = num / (fprime * du)
    if not math.isfinite(ratio):
        raise DegenerateInput("chain rule ratio is not finite")
    return ratio


def _multiplier_derivative_norm(field: Field, alpha: float, p: float, bump) -> float:
    return float(lp_norm_array(fractional_derivative(field, alpha).samples, field.grid, p))


def _dyadic_derivative_norm(field: Field, alpha: float, p: float, bump: DyadicBump) -> float:
    shells = lp_shells(field.samples, field.grid, bump)
    weights = np.array([4.0 ** (j * alpha) for j in bump.j_range])
    sq = np.sqrt(np.tensordot(weights, pointwise_norm(shells) ** 2, axes=1))
    return scalar_lp_norm(sq, field.grid, p)
