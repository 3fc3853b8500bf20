"""E-valued grid functions, trajectories, and the norms and functionals on them.

``E = C^N`` carries the Euclidean norm; ``||u(x)||_E`` is the pointwise
component norm.  Spatial integrals are Riemann sums with weight ``h^n``;
time integrals use the trapezoid rule on the uniform trajectory grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Sequence

import numpy as np

from . import admissibility as adm
from .errors import (
    EmptyTrajectory,
    InvalidExponent,
    InvalidField,
    MatrixMismatch,
    ShapeMismatch,
)
from .grid import GridSpec


@dataclass(frozen=True, eq=False)
class Field:
    """Samples ``u(x) in C^N`` on a grid at an optional time ``time``."""

    grid: GridSpec
    samples: np.ndarray
    time: float | None = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        if samples.shape != self.grid.shape:
            raise ShapeMismatch(f"samples have shape {samples.shape}, grid expects {self.grid.shape}")
        if not np.all(np.isfinite(samples)):
            raise InvalidField("field contains NaN or Inf samples")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @classmethod
    def zeros(cls, grid: GridSpec, time: float | None = None) -> Field:
        return cls(grid, np.zeros(grid.shape, dtype=complex), time)

    @classmethod
    def from_function(cls, grid: GridSpec, func, weights=None, time: float | None = None) -> Field:
        """Sample a scalar profile ``func(*coords)`` times a component vector.

        ``weights`` defaults to ``(1, 0, ..., 0)``.
        """
        profile = np.broadcast_to(np.asarray(func(*grid.coordinates), dtype=complex), grid.spatial_shape)
        if weights is None:
            weights = np.eye(grid.component_count)[0]
        weights = np.asarray(weights, dtype=complex)
        if weights.shape != (grid.component_count,):
            raise ShapeMismatch(f"weights must have {grid.component_count} entries")
        return cls(grid, profile[..., None] * weights, time)

    def with_samples(self, samples: np.ndarray, time: float | None = None) -> Field:
        return Field(self.grid, samples, self.time if time is None else time)

    def pointwise_norm(self) -> np.ndarray:
        return pointwise_norm(self.samples)

    def __add__(self, other: Field) -> Field:
        _same_grid(self.grid, other.grid)
        return Field(self.grid, self.samples + other.samples, self.time)

    def __sub__(self, other: Field) -> Field:
        _same_grid(self.grid, other.grid)
        return Field(self.grid, self.samples - other.samples, self.time)

    def __mul__(self, c) -> Field:
        return Field(self.grid, self.samples * c, self.time)

    __rmul__ = __mul__

    def mean(self) -> np.ndarray:
        """Component-wise spatial average."""
        return self.samples.mean(axis=tuple(range(self.grid.n_dims)))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Normalized Fourier coefficients of a :class:`Field` (FFT layout)."""

    grid: GridSpec
    coefficients: np.ndarray
    time: float | None = None

    def l2_norm(self) -> float:
        return self.grid.spectral_l2(self.coefficients)


def _same_grid(a: GridSpec, b: GridSpec) -> None:
    if a is not b and (a.n_dims, a.points_per_dim, a.domain_length, a.component_count) != (
        b.n_dims,
        b.points_per_dim,
        b.domain_length,
        b.component_count,
    ):
        raise ShapeMismatch("fields live on different grids")


def forward_transform(field: Field) -> Spectrum:
    if not isinstance(field, Field):
        raise ShapeMismatch("forward_transform expects a Field")
    return Spectrum(field.grid, field.grid.fft(field.samples), field.time)


def inverse_transform(spectrum: Spectrum) -> Field:
    coeffs = np.asarray(spectrum.coefficients)
    spectrum.grid.check_layout(coeffs)
    return Field(spectrum.grid, spectrum.grid.ifft(coeffs), spectrum.time)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled time series of fields on one grid.

    ``data`` has shape ``(K+1,) + grid.shape``; frame ``k`` sits at ``times[k]``.
    """

    grid: GridSpec
    times: np.ndarray
    data: np.ndarray
    metadata: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        data = np.asarray(self.data, dtype=complex)
        if times.ndim != 1:
            raise ShapeMismatch("times must be one-dimensional")
        if data.shape != (times.size,) + self.grid.shape:
            raise ShapeMismatch(f"data shape {data.shape} does not match {(times.size,) + self.grid.shape}")
        if times.size >= 2:
            steps = np.diff(times)
            if np.any(steps <= 0):
                raise ShapeMismatch("times must be strictly increasing")
            if np.max(np.abs(steps - steps.mean())) > 1e-12 * max(abs(steps.mean()), np.max(np.abs(times))):
                raise ShapeMismatch("times must be uniformly spaced")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_frames(cls, frames: Sequence[Field], times: Iterable[float] | None = None, metadata=None) -> Trajectory:
        if not frames:
            raise EmptyTrajectory("no frames")
        grid = frames[0].grid
        for f in frames[1:]:
            _same_grid(grid, f.grid)
        if times is None:
            times = [f.time for f in frames]
            if any(t is None for t in times):
                raise ShapeMismatch("frames without time tags need explicit times")
        return cls(grid, np.asarray(list(times), dtype=float), np.stack([f.samples for f in frames]), metadata or {})

    def __len__(self) -> int:
        return self.times.size

    @property
    def dt(self) -> float:
        if self.times.size < 2:
            return 0.0
        return float((self.times[-1] - self.times[0]) / (self.times.size - 1))

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0]) if self.times.size else 0.0

    def frame(self, k: int) -> Field:
        return Field(self.grid, self.data[k], float(self.times[k]))

    @property
    def frames(self) -> list[Field]:
        return [self.frame(k) for k in range(len(self))]

    def map_frames(self, func) -> Trajectory:
        """New trajectory with ``func`` applied to the stacked sample array."""
        return Trajectory(self.grid, self.times, func(self.data), dict(self.metadata))


# ----------------------------------------------------------------------------
# array-level kernels (shared with the solvers, which work on raw arrays)


def pointwise_norm(samples: np.ndarray) -> np.ndarray:
    """``||u(x)||_E`` over the trailing component axis."""
    return np.sqrt(np.sum(samples.real**2 + samples.imag**2, axis=-1))


def _check_p(p) -> float:
    p = adm.to_float(p) if not isinstance(p, (int, float, np.floating, np.integer)) else float(p)
    if not p >= 1:
        raise InvalidExponent(f"Lebesgue exponent must lie in [1, inf], got {p}")
    return p


def lp_norm_array(samples: np.ndarray, grid: GridSpec, p: float) -> np.ndarray:
    """L^p_x norm over the spatial axes; leading batch axes are kept."""
    mag = pointwise_norm(samples)
    axes = tuple(range(-grid.n_dims, 0))
    if math.isinf(p):
        return np.max(mag, axis=axes)
    if p == 2:
        return np.sqrt(grid.cell_volume * np.sum(mag**2, axis=axes))
    scale = np.max(mag, axis=axes, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    inner = np.sum((mag / safe) ** p, axis=axes)
    return np.squeeze(safe, axis=axes) * (grid.cell_volume * inner) ** (1.0 / p)


def time_norm(values: np.ndarray, dt: float, q: float) -> float:
    """Trapezoid L^q_t norm of nonnegative samples on a uniform grid."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise EmptyTrajectory("no frames")
    if math.isinf(q):
        return float(np.max(values))
    if values.size == 1:
        return 0.0
    scale = float(np.max(values))
    if scale == 0.0:
        return 0.0
    w = (values / scale) ** q
    integral = dt * (np.sum(w) - 0.5 * (w[0] + w[-1]))
    return scale * float(integral) ** (1.0 / q)


def mixed_norm_array(data: np.ndarray, grid: GridSpec, dt: float, q: float, r: float) -> float:
    return time_norm(lp_norm_array(data, grid, r), dt, q)


# ----------------------------------------------------------------------------
# public norms


def lp_norm(field: Field, p) -> float:
    """``(h^n sum ||u(x)||_E^p)^(1/p)``, or the max for ``p = inf``."""
    return float(lp_norm_array(field.samples, field.grid, _check_p(p)))


def mixed_norm(trajectory: Trajectory, q, r) -> float:
    """``|| ||u(t)||_{L^r_x} ||_{L^q_t}`` with the trapezoid rule in time."""
    q, r = _check_p(q), _check_p(r)
    if len(trajectory) == 0:
        raise EmptyTrajectory("trajectory has no frames")
    return mixed_norm_array(trajectory.data, trajectory.grid, trajectory.dt, q, r)


def sobolev_multiplier(grid: GridSpec, s: float, homogeneous: bool) -> np.ndarray:
    if homogeneous:
        out = np.zeros(grid.spatial_shape)
        nz = grid.xi_abs > 0
        out[nz] = grid.xi_abs[nz] ** s
        return out
    return grid.japanese_bracket**s


def sobolev_norm(field: Field, s: float, p, homogeneous: bool = False) -> float:
    """L^p norm of ``<xi>^s u_hat`` (or ``|xi|^s u_hat`` with the zero mode dropped)."""
    p = _check_p(p)
    if math.isinf(p):
        raise InvalidExponent("Sobolev norms are defined here for p in [1, inf)")
    if s == 0 and not homogeneous:
        return lp_norm(field, p)
    g = field.grid
    return float(lp_norm_array(g.apply_multiplier(field.samples, sobolev_multiplier(g, s, homogeneous)), g, p))


def mass(field: Field) -> float:
    """``int ||u(x)||_E^2 dx``."""
    s = field.samples
    return float(field.grid.cell_volume * np.sum(s.real**2 + s.imag**2))


def coupling_array(A, component_count: int) -> np.ndarray | None:
    """Dense matrix behind ``A`` (a CouplingMatrix, array or None), size-checked."""
    if A is None:
        return None
    mat = np.asarray(getattr(A, "matrix", A), dtype=complex)
    if mat.shape != (component_count, component_count):
        raise MatrixMismatch(f"matrix of shape {mat.shape} does not act on {component_count} components")
    return mat


def energy_density_terms(samples: np.ndarray, grid: GridSpec, p: float, lam: float, A=None) -> tuple[float, float, float]:
    """Kinetic, coupling and potential parts of the Hamiltonian (unsigned integrals)."""
    spectrum = np.fft.fftn(samples, axes=grid.spatial_axes)
    # discrete Plancherel: h^n sum |grad u|^2 = h^n / M^n sum |xi|^2 |fft u|^2
    kinetic = grid.cell_volume / grid.points_per_dim**grid.n_dims * float(
        np.sum(grid.xi_sq[..., None] * (spectrum.real**2 + spectrum.imag**2))
    )
    mat = coupling_array(A, grid.component_count)
    coupling = 0.0
    if mat is not None:
        coupling = grid.cell_volume * float(np.real(np.sum(np.conj(samples) * (samples @ mat.T))))
    potential = grid.cell_volume * float(np.sum(pointwise_norm(samples) ** (p + 2)))
    return kinetic, coupling, potential


def energy(field: Field, p: float, lam: float, A=None) -> float:
    """Hamiltonian conserved by ``i u_t + Lap u + A u + lam ||u||^p u = 0``.

    ``int 1/2 ||grad u||^2 - 1/2 <A u, u> - lam/(p+2) ||u||^(p+2) dx``.
    """
    if not p > 0:
        raise InvalidExponent(f"nonlinearity power must be > 0, got {p}")
    kinetic, coupling, potential = energy_density_terms(field.samples, field.grid, p, lam, A)
    return 0.5 * kinetic - 0.5 * coupling - lam / (p + 2.0) * potential


@dataclass(frozen=True)
class StrichartzTable:
    value: float
    rows: tuple[tuple[str, float], ...]

    def as_dict(self) -> dict[str, float]:
        return dict(self.rows)


def strichartz_norm(trajectory: Trajectory, pairs=None, sample_count: int | None = None) -> StrichartzTable:
    """Max of ``L^q_t L^r_x`` norms over a finite sample of admissible pairs.

    The true S^0 norm is a supremum over every admissible pair; only the
    supplied sample is evaluated.  ``pairs`` defaults to
    :func:`vnls.admissibility.default_pairs`; ``sample_count`` truncates it.
    """
    n = trajectory.grid.n_dims
    if pairs is None:
        pairs = adm.default_pairs(n)
    checked = []
    for pair in pairs:
        if isinstance(pair, adm.AdmissiblePair):
            if pair.n != n:
                raise adm.InadmissiblePair(f"pair {pair.label()} was built for n = {pair.n}, grid has n = {n}")
            checked.append(pair)
        else:
            checked.append(adm.admissible_pair(n, *pair))
    if sample_count is not None:
        checked = checked[:sample_count]
    if not checked:
        raise adm.InadmissiblePair("empty pair set")
    rows = tuple((p.label(), mixed_norm(trajectory, p.q_float, p.r_float)) for p in checked)
    return StrichartzTable(max(v for _, v in rows), rows)
