"""Linear evolution for ``i u_t + Lap u + A u = 0``.

Sign convention, fixed here and inherited everywhere: the free flow acts on
each mode as ``exp(-i |xi|^2 t)`` and the coupling flow as ``exp(i A t)``.
Because ``A`` acts on components and the Laplacian on space, the two
commute and ``U(t) = exp(iAt) exp(-i|xi|^2 t)`` mode by mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import (
    MatrixMismatch,
    NotHermitian,
    NotPositive,
    TimeZero,
    ZeroNorm,
)
from .fields import Field, _check_p, coupling_array, lp_norm_array
from .grid import GridSpec
from . import admissibility as adm

HERMITIAN_TOL = 1e-12


def _check_hermitian(mat: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise NotHermitian(f"coupling matrix must be square, got shape {mat.shape}")
    scale = max(1.0, float(np.max(np.abs(mat)))) if mat.size else 1.0
    dev = float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0
    if dev > tol * scale:
        raise NotHermitian(f"matrix deviates from its conjugate transpose by {dev:.3e}")


@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """Hermitian ``N x N`` matrix with a cached eigendecomposition.

    ``mu`` is a shift making ``A + mu I`` positive definite; when not given it
    is 0 for a positive spectrum and ``1 - min(eigenvalue)`` otherwise.
    """

    matrix: np.ndarray
    mu: float | None = None
    eigenvalues: np.ndarray = dc_field(init=False, repr=False)
    eigenvectors: np.ndarray = dc_field(init=False, repr=False)
    projection_norm: float = 0.0

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        if not np.all(np.isfinite(mat)):
            raise NotHermitian("coupling matrix has non-finite entries")
        _check_hermitian(mat)
        mat = 0.5 * (mat + mat.conj().T)
        mat.setflags(write=False)
        vals, vecs = np.linalg.eigh(mat)
        vals.setflags(write=False)
        vecs.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", vecs)
        if self.mu is None:
            shift = 0.0 if vals[0] > 0 else 1.0 - float(vals[0])
            object.__setattr__(self, "mu", shift)
        elif self.mu < 0:
            raise NotPositive(f"shift mu must be >= 0, got {self.mu}")

    @classmethod
    def zero(cls, size: int) -> CouplingMatrix:
        return cls(np.zeros((size, size)))

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def spectral_bound(self) -> float:
        """``omega = max |eigenvalue|``."""
        return float(np.max(np.abs(self.eigenvalues)))

    def spectral_function(self, values: np.ndarray) -> np.ndarray:
        """``V diag(values) V*``."""
        v = self.eigenvectors
        return (v * values) @ v.conj().T

    def reconstruction_error(self) -> float:
        rebuilt = self.spectral_function(self.eigenvalues)
        return float(np.linalg.norm(rebuilt - self.matrix) / max(np.linalg.norm(self.matrix), 1e-300))


def as_coupling(A, size: int | None = None) -> CouplingMatrix | None:
    if A is None:
        return None
    if not isinstance(A, CouplingMatrix):
        A = CouplingMatrix(np.asarray(A))
    if size is not None and A.size != size:
        raise MatrixMismatch(f"coupling matrix is {A.size}x{A.size}, field has {size} components")
    return A


def free_multiplier(grid: GridSpec, t: float) -> np.ndarray:
    return np.exp(-1j * grid.xi_sq * t)


def free_propagate(field: Field, t: float) -> Field:
    """Solve ``i u_t + Lap u = 0`` for time ``t`` (any sign)."""
    if t == 0:
        return field
    out = field.grid.apply_multiplier(field.samples, free_multiplier(field.grid, t))
    return Field(field.grid, out, None if field.time is None else field.time + t)


def matrix_group(A, t: float) -> np.ndarray:
    """Unitary ``exp(i A t)`` from the eigendecomposition of Hermitian ``A``."""
    A = as_coupling(A)
    return A.spectral_function(np.exp(1j * A.eigenvalues * t))


def apply_components(samples: np.ndarray, mat: np.ndarray) -> np.ndarray:
    """Apply an ``N x N`` matrix at every grid point."""
    return samples @ mat.T


def propagate_array(samples: np.ndarray, grid: GridSpec, A: CouplingMatrix | None, t: float) -> np.ndarray:
    """Array kernel of :func:`combined_propagate`; ``samples`` may carry batch axes."""
    out = grid.apply_multiplier(samples, free_multiplier(grid, t))
    if A is not None:
        out = apply_components(out, matrix_group(A, t))
    return out


def combined_propagate(field: Field, A, t: float) -> Field:
    """Solve ``i u_t + Lap u + A u = 0`` for time ``t``."""
    A = as_coupling(A, field.grid.component_count)
    if t == 0:
        return field
    return Field(field.grid, propagate_array(field.samples, field.grid, A, t), None if field.time is None else field.time + t)


def matrix_fractional_power(A, mu: float | None, alpha: float) -> np.ndarray:
    """``(A + mu I)^alpha`` for ``0 <= alpha < 1``."""
    A = as_coupling(A)
    if not 0 <= alpha < 1:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    mu = A.mu if mu is None else mu
    shifted = A.eigenvalues + mu
    if np.any(shifted <= 0):
        raise NotPositive(f"A + mu has eigenvalue {float(shifted.min()):.6g} <= 0")
    if alpha == 0:
        return np.eye(A.size, dtype=complex)
    return A.spectral_function(shifted**alpha)


def fractional_weight(A, mu, alpha: float, size: int) -> np.ndarray | None:
    """``(A + mu)^alpha`` or None when it is the identity (alpha = 0)."""
    if alpha == 0:
        return None
    if A is None:
        A = CouplingMatrix.zero(size)
    A = as_coupling(A, size)
    return matrix_fractional_power(A, mu, alpha)


def dispersive_ratio(u0: Field, t: float, p, A=None, alpha: float = 0.0, mu: float | None = None) -> float:
    """``||(A+mu)^alpha U(t) u0||_{L^p} / ||u0||_{L^p'}``."""
    if t == 0:
        raise TimeZero("dispersive ratio is undefined at t = 0")
    p_exp = adm.as_exponent(p)
    p_f = _check_p(p_exp)
    if p_f < 2:
        raise ValueError(f"dispersive estimates need p >= 2, got {p_f}")
    p_dual = adm.to_float(adm.dual_exponent(p_exp))
    grid = u0.grid
    denom = float(lp_norm_array(u0.samples, grid, p_dual))
    if denom == 0:
        raise ZeroNorm("||u0||_{L^p'} = 0")
    A = as_coupling(A, grid.component_count)
    evolved = propagate_array(u0.samples, grid, A, t)
    weight = fractional_weight(A, mu, alpha, grid.component_count)
    if weight is not None:
        evolved = apply_components(evolved, weight)
    return float(lp_norm_array(evolved, grid, p_f)) / denom


def gaussian_closed_form(grid: GridSpec, t: float, weights=None) -> np.ndarray:
    """``(1+2it)^(-n/2) exp(-|x|^2 / (2(1+2it)))``: the free flow of ``exp(-|x|^2/2)`` on ``R^n``."""
    z = 1.0 + 2.0j * t
    profile = z ** (-grid.n_dims / 2.0) * np.exp(-grid.radius_sq / (2.0 * z))
    if weights is None:
        weights = np.eye(grid.component_count)[0]
    return profile[..., None] * np.asarray(weights, dtype=complex)


__all__ = [
    "CouplingMatrix",
    "as_coupling",
    "free_propagate",
    "matrix_group",
    "combined_propagate",
    "matrix_fractional_power",
    "dispersive_ratio",
    "gaussian_closed_form",
    "coupling_array",
]
