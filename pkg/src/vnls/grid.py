"""Periodic box discretization and the normalized Fourier transform pair.

The box ``[-L/2, L/2)^n`` stands in for ``R^n``.  Integrals become Riemann
sums ``h^n * sum(...)`` with ``h = L / M``.  The forward transform
approximates ``u_hat(xi) = int u(x) exp(-i x.xi) dx`` and the inverse
approximates ``(2 pi)^-n int u_hat(xi) exp(i x.xi) dxi``, so that

    h^n * sum |u|^2  ==  L^-n * sum |u_hat|^2

holds exactly in exact arithmetic (discrete Plancherel).

Array layout: a field with ``N`` components on an ``n``-dimensional grid is
an array of shape ``(M,)*n + (N,)``; any number of leading batch axes (for
example a time axis) is allowed.  Spatial axes are therefore always the
``n`` axes immediately before the trailing component axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidGrid, ShapeMismatch

MAX_SAMPLES = 2**26


def _is_power_of_two(m: int) -> bool:
    return m > 0 and (m & (m - 1)) == 0


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Validated periodic grid; build with :func:`make_grid`."""

    n_dims: int
    points_per_dim: int
    domain_length: float
    component_count: int = 1

    @property
    def h(self) -> float:
        return self.domain_length / self.points_per_dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.n_dims

    @property
    def shape(self) -> tuple[int, ...]:
        """Sample layout of one field: spatial axes then components."""
        return (self.points_per_dim,) * self.n_dims + (self.component_count,)

    @property
    def spatial_shape(self) -> tuple[int, ...]:
        return (self.points_per_dim,) * self.n_dims

    @property
    def spatial_axes(self) -> tuple[int, ...]:
        return tuple(range(-self.n_dims - 1, -1))

    @property
    def volume(self) -> float:
        return self.domain_length**self.n_dims

    def with_components(self, component_count: int) -> GridSpec:
        return make_grid(self.n_dims, self.points_per_dim, self.domain_length, component_count)

    def refined(self) -> GridSpec:
        """Same box with twice the resolution per axis."""
        return make_grid(self.n_dims, 2 * self.points_per_dim, self.domain_length, self.component_count)

    # -- physical space -------------------------------------------------
    @cached_property
    def x_axis(self) -> np.ndarray:
        m = self.points_per_dim
        return (np.arange(m) - m // 2) * self.h

    @cached_property
    def coordinates(self) -> tuple[np.ndarray, ...]:
        """Open meshgrid of positions, one broadcastable array per axis."""
        return tuple(np.meshgrid(*([self.x_axis] * self.n_dims), indexing="ij", sparse=True))

    @cached_property
    def radius_sq(self) -> np.ndarray:
        return sum(c**2 for c in self.coordinates)

    # -- frequency space ------------------------------------------------
    @cached_property
    def xi_axis(self) -> np.ndarray:
        """Wavenumbers of one axis in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.points_per_dim, d=self.h)

    def lattice(self) -> np.ndarray:
        """Wavenumbers of one axis in natural order, ``2 pi k / L`` for k = -M/2..M/2-1."""
        m = self.points_per_dim
        return 2.0 * np.pi * np.arange(-m // 2, m // 2) / self.domain_length

    @cached_property
    def xi_components(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.xi_axis] * self.n_dims), indexing="ij", sparse=True))

    @cached_property
    def xi_sq(self) -> np.ndarray:
        """``|xi|^2`` on the spectral layout, shape ``spatial_shape``."""
        out = np.zeros(self.spatial_shape)
        for k in self.xi_components:
            out = out + k**2
        out.setflags(write=False)
        return out

    @cached_property
    def xi_abs(self) -> np.ndarray:
        out = np.sqrt(self.xi_sq)
        out.setflags(write=False)
        return out

    @cached_property
    def japanese_bracket(self) -> np.ndarray:
        """``<xi> = (1 + |xi|^2)^(1/2)``."""
        return np.sqrt(1.0 + self.xi_sq)

    def xi_of_index(self, index: tuple[int, ...]) -> np.ndarray:
        """Frequency vector stored at a spectral-layout index."""
        return np.array([self.xi_axis[i] for i in index])

    def index_of_xi(self, xi) -> tuple[int, ...]:
        """Spectral-layout index of the lattice frequency nearest to ``xi``."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        if xi.shape != (self.n_dims,):
            raise ShapeMismatch(f"frequency must have {self.n_dims} entries")
        k = np.rint(xi * self.domain_length / (2.0 * np.pi)).astype(int)
        return tuple(int(v) % self.points_per_dim for v in k)

    @property
    def xi_max(self) -> float:
        return float(np.sqrt(self.n_dims)) * np.pi / self.h

    @property
    def xi_min_nonzero(self) -> float:
        return 2.0 * np.pi / self.domain_length

    # -- transforms -----------------------------------------------------
    def check_layout(self, array: np.ndarray) -> None:
        if array.ndim < self.n_dims + 1 or array.shape[-self.n_dims - 1 :] != self.shape:
            raise ShapeMismatch(f"array trailing shape {array.shape} does not match grid layout {self.shape}")

    @cached_property
    def _origin_phase(self) -> np.ndarray:
        # sample 0 sits at x = -L/2, so exp(i xi L/2) = (-1)^k per axis
        k = np.rint(np.fft.fftfreq(self.points_per_dim) * self.points_per_dim).astype(int)
        sign = np.where(k % 2 == 0, 1.0, -1.0)
        out = np.ones(self.spatial_shape)
        for axis in range(self.n_dims):
            shape = [1] * self.n_dims
            shape[axis] = self.points_per_dim
            out = out * sign.reshape(shape)
        return out

    def fft(self, array: np.ndarray) -> np.ndarray:
        """Forward transform over the spatial axes: ``h^n sum u(x) exp(-i x.xi)``."""
        self.check_layout(array)
        spectrum = np.fft.fftn(array, axes=self.spatial_axes)
        return spectrum * (self._origin_phase * self.cell_volume)[..., None]

    def ifft(self, array: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`fft`."""
        self.check_layout(array)
        scale = self.points_per_dim**self.n_dims / self.volume
        return np.fft.ifftn(array * (self._origin_phase * scale)[..., None], axes=self.spatial_axes)

    def apply_multiplier(self, array: np.ndarray, multiplier: np.ndarray) -> np.ndarray:
        """Apply a scalar Fourier multiplier given on ``spatial_shape``."""
        spectrum = np.fft.fftn(array, axes=self.spatial_axes)
        spectrum *= multiplier[..., None]
        return np.fft.ifftn(spectrum, axes=self.spatial_axes)

    def spectral_l2(self, spectrum: np.ndarray) -> float:
        """Weighted l2 norm ``(L^-n sum |u_hat|^2)^(1/2)`` of one spectrum."""
        return float(np.sqrt(np.sum(np.abs(spectrum) ** 2) / self.volume))


def make_grid(n_dims: int, points_per_dim: int, domain_length: float, component_count: int = 1) -> GridSpec:
    """Validate parameters and build a :class:`GridSpec`.

    Raises
    ------
    InvalidGrid
        Naming the first offending field.
    """
    if isinstance(n_dims, bool) or not isinstance(n_dims, (int, np.integer)) or n_dims not in (1, 2, 3):
        raise InvalidGrid(f"n_dims must be 1, 2 or 3, got {n_dims!r}")
    if (
        isinstance(points_per_dim, bool)
        or not isinstance(points_per_dim, (int, np.integer))
        or points_per_dim < 8
        or not _is_power_of_two(int(points_per_dim))
    ):
        raise InvalidGrid(f"points_per_dim must be a power of two >= 8, got {points_per_dim!r}")
    try:
        length = float(domain_length)
    except (TypeError, ValueError):
        raise InvalidGrid(f"domain_length must be a positive real, got {domain_length!r}") from None
    if not np.isfinite(length) or length <= 0:
        raise InvalidGrid(f"domain_length must be a positive real, got {domain_length!r}")
    if isinstance(component_count, bool) or not isinstance(component_count, (int, np.integer)) or component_count < 1:
        raise InvalidGrid(f"component_count must be an integer >= 1, got {component_count!r}")
    if int(points_per_dim) ** int(n_dims) * int(component_count) > MAX_SAMPLES:
        raise InvalidGrid(
            f"points_per_dim/component_count: {points_per_dim}^{n_dims} x {component_count} samples exceeds budget {MAX_SAMPLES}"
        )
    return GridSpec(int(n_dims), int(points_per_dim), length, int(component_count))
