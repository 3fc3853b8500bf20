"""Initial-data families.

Each family is described by parameters independent of the grid resolution,
so the same sample can be re-evaluated on a refined grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch
from .fields import Field
from .grid import GridSpec

FAMILIES = ("gaussian", "bandlimited")


@dataclass(frozen=True)
class GaussianData:
    """``amplitude * exp(-|x-c|^2 / (2 w^2) + i k.x) * weights``."""

    amplitude: complex = 1.0
    width: float = 1.0
    center: tuple[float, ...] = ()
    velocity: tuple[float, ...] = ()
    weights: tuple[complex, ...] = ()

    def evaluate(self, grid: GridSpec) -> Field:
        n = grid.n_dims
        center = self.center or (0.0,) * n
        velocity = self.velocity or (0.0,) * n
        if len(center) != n or len(velocity) != n:
            raise ShapeMismatch(f"center and velocity need {n} entries")
        arg = np.zeros(grid.spatial_shape, dtype=complex)
        for x, c, k in zip(grid.coordinates, center, velocity):
            arg = arg - (x - c) ** 2 / (2.0 * self.width**2) + 1j * k * x
        weights = self.weights or tuple(np.eye(grid.component_count)[0])
        if len(weights) != grid.component_count:
            raise ShapeMismatch(f"weights need {grid.component_count} entries")
        profile = self.amplitude * np.exp(arg)
        return Field(grid, profile[..., None] * np.asarray(weights, dtype=complex), 0.0)


@dataclass(frozen=True)
class BandlimitedData:
    """Finite Fourier sum ``sum_k c_k exp(i 2 pi k.x / L)`` over a few lattice modes."""

    modes: tuple[tuple[int, ...], ...]
    coefficients: np.ndarray  # shape (len(modes), N)

    def evaluate(self, grid: GridSpec) -> Field:
        out = np.zeros(grid.shape, dtype=complex)
        x0 = -grid.domain_length / 2
        for mode, coeff in zip(self.modes, self.coefficients):
            phase = np.zeros(grid.spatial_shape)
            for x, k in zip(grid.coordinates, mode):
                phase = phase + 2 * np.pi * k * (x - x0) / grid.domain_length
            out += np.exp(1j * phase)[..., None] * coeff
        return Field(grid, out, 0.0)


def gaussian(grid: GridSpec, amplitude=1.0, width=1.0, center=None, velocity=None, weights=None) -> Field:
    return GaussianData(
        amplitude,
        width,
        tuple(center or ()),
        tuple(velocity or ()),
        tuple(weights or ()),
    ).evaluate(grid)


def random_complex_unit(rng: np.random.Generator, size: int) -> np.ndarray:
    v = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return v / np.linalg.norm(v)


def sample_gaussian(rng: np.random.Generator, grid: GridSpec) -> GaussianData:
    n, L = grid.n_dims, grid.domain_length
    return GaussianData(
        amplitude=complex(np.exp(2j * np.pi * rng.random())),
        width=float(rng.uniform(0.7, 1.5)),
        center=tuple(float(c) for c in rng.uniform(-L / 16, L / 16, n)),
        velocity=tuple(float(k) for k in rng.uniform(-1.0, 1.0, n)),
        weights=tuple(complex(w) for w in random_complex_unit(rng, grid.component_count)),
    )


def sample_bandlimited(rng: np.random.Generator, grid: GridSpec, max_mode: int = 4) -> BandlimitedData:
    n = grid.n_dims
    ks = np.arange(-max_mode, max_mode + 1)
    mesh = np.stack(np.meshgrid(*([ks] * n), indexing="ij"), axis=-1).reshape(-1, n)
    modes = tuple(tuple(int(v) for v in m) for m in mesh if 0 < np.sum(np.asarray(m) ** 2) <= max_mode**2)
    coeffs = rng.standard_normal((len(modes), grid.component_count)) + 1j * rng.standard_normal((len(modes), grid.component_count))
    coeffs /= np.sqrt(len(modes) * grid.component_count)
    return BandlimitedData(modes, coeffs)


def sample_family(family: str, rng: np.random.Generator, grid: GridSpec):
    if family == "gaussian":
        return sample_gaussian(rng, grid)
    if family == "bandlimited":
        return sample_bandlimited(rng, grid)
    raise ValueError(f"unknown data family {family!r}; expected one of {FAMILIES}")


def random_smooth_field(grid: GridSpec, rng: np.random.Generator, max_mode: int = 6) -> Field:
    """Mean-zero random trigonometric polynomial with a smooth spectral envelope."""
    spec = np.zeros(grid.shape, dtype=complex)
    k_index = np.rint(grid.xi_abs * grid.domain_length / (2 * np.pi))
    band = (k_index > 0) & (k_index <= max_mode)
    noise = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    spec[band] = noise[band] * np.exp(-(k_index[band] / max_mode) ** 2)[..., None]
    samples = np.fft.ifftn(spec, axes=grid.spatial_axes)
    samples /= max(float(np.max(np.abs(samples))), 1e-300)
    return Field(grid, samples, 0.0)
