"""Coupled N-component systems: coupling-matrix families and per-component diagnostics.

Matrix files are JSON arrays of rows, each entry a ``[re, im]`` pair::

    [[[1, 0], [0, -1]],
     [[0, 1], [2, 0]]]
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import BadEntries, NotHermitian
from .fields import Trajectory
from .propagators import CouplingMatrix, _check_hermitian

MAX_COMPONENTS = 64
MATRIX_KINDS = ("diagonal", "chain", "dense", "from_file")


def _complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise BadEntries(f"complex entry must be a [re, im] pair, got {value!r}")
        re, im = value
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in (re, im)):
            raise BadEntries(f"complex entry must hold two reals, got {value!r}")
        return complex(float(re), float(im))
    if isinstance(value, bool) or not isinstance(value, (int, float, complex, np.number)):
        raise BadEntries(f"not a numeric entry: {value!r}")
    return complex(value)


@dataclass(frozen=True)
class SystemSpec:
    """Recipe for a coupling matrix.

    ``entries`` by kind:

    * ``diagonal``: N diagonal values.
    * ``chain``: ``{"diagonal": value or N values, "offdiag": value or N-1 values}``;
      the lower diagonal is the conjugate of the upper one.
    * ``dense``: N rows of N values.
    * ``from_file``: path to a matrix file.
    """

    N: int
    matrix_kind: str
    entries: Any = None
    hermitize: bool = False
    mu: float | None = None

    def __post_init__(self):
        if isinstance(self.N, bool) or not isinstance(self.N, int) or not 1 <= self.N <= MAX_COMPONENTS:
            raise BadEntries(f"N must be an integer in [1, {MAX_COMPONENTS}], got {self.N!r}")
        if self.matrix_kind not in MATRIX_KINDS:
            raise BadEntries(f"matrix_kind must be one of {MATRIX_KINDS}, got {self.matrix_kind!r}")


def _vector(values, length: int, name: str) -> np.ndarray:
    """A list of ``length`` entries, or one scalar (number or [re, im]) broadcast.

    A list whose length equals ``length`` is always read entry by entry.
    """
    if isinstance(values, (list, tuple)) and len(values) == length:
        return np.array([_complex(v) for v in values])
    try:
        return np.full(length, _complex(values))
    except BadEntries:
        raise BadEntries(f"{name}: expected a scalar or {length} values, got {values!r}") from None


def dense_matrix(spec: SystemSpec) -> np.ndarray:
    N, kind, entries = spec.N, spec.matrix_kind, spec.entries
    if kind == "diagonal":
        if entries is None:
            entries = [0.0] * N
        return np.diag(_vector(entries, N, "diagonal"))
    if kind == "chain":
        if not isinstance(entries, dict) or set(entries) - {"diagonal", "offdiag"}:
            raise BadEntries("chain entries must be a mapping with keys 'diagonal' and 'offdiag'")
        diag = _vector(entries.get("diagonal", 0.0), N, "diagonal")
        mat = np.diag(diag)
        if N > 1:
            off = _vector(entries.get("offdiag", 0.0), N - 1, "offdiag")
            mat = mat + np.diag(off, 1) + np.diag(off.conj(), -1)
        return mat
    if kind == "dense":
        if not isinstance(entries, (list, tuple)) or len(entries) != N:
            raise BadEntries(f"dense entries must be {N} rows")
        rows = []
        for row in entries:
            if not isinstance(row, (list, tuple)) or len(row) != N:
                raise BadEntries(f"each dense row must hold {N} entries")
            rows.append([_complex(v) for v in row])
        return np.array(rows, dtype=complex)
    if kind == "from_file":
        if not isinstance(entries, (str, os.PathLike)):
            raise BadEntries("from_file entries must be a path")
        mat = load_matrix_file(entries)
        if mat.shape != (N, N):
            raise BadEntries(f"matrix file holds a {mat.shape} matrix, expected {(N, N)}")
        return mat
    raise BadEntries(f"unknown matrix kind {kind!r}")


def build_coupling(spec: SystemSpec) -> CouplingMatrix:
    """Hermitian coupling matrix; non-Hermitian input is rejected or projected."""
    mat = dense_matrix(spec)
    if not np.all(np.isfinite(mat)):
        raise BadEntries("matrix entries must be finite")
    projection = 0.0
    try:
        _check_hermitian(mat)
    except NotHermitian:
        if not spec.hermitize:
            raise
        herm = 0.5 * (mat + mat.conj().T)
        projection = float(np.linalg.norm(mat - herm))
        mat = herm
    cm = CouplingMatrix(mat, mu=spec.mu)
    object.__setattr__(cm, "projection_norm", projection)
    return cm


def load_matrix_file(path) -> np.ndarray:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise BadEntries(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}") from None
    except OSError as exc:
        raise BadEntries(f"cannot read matrix file {path}: {exc}") from None
    if not isinstance(raw, list) or not raw:
        raise BadEntries(f"{path}: expected a non-empty array of rows")
    n = len(raw)
    rows = []
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != n:
            raise BadEntries(f"{path}: row {i} must hold {n} [re, im] pairs")
        for v in row:
            if not isinstance(v, list):
                raise BadEntries(f"{path}: row {i} entries must be [re, im] pairs")
        rows.append([_complex(v) for v in row])
    return np.array(rows, dtype=complex)


def save_matrix_file(path, matrix) -> None:
    mat = np.asarray(getattr(matrix, "matrix", matrix), dtype=complex)
    payload = [[[float(v.real), float(v.imag)] for v in row] for row in mat]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def component_mass_series(trajectory: Trajectory) -> np.ndarray:
    """``M_m(t) = int |u_m(t, x)|^2 dx``, shape ``(frames, N)``."""
    g = trajectory.grid
    d = trajectory.data
    axes = tuple(range(1, g.n_dims + 1))
    return g.cell_volume * np.sum(d.real**2 + d.imag**2, axis=axes)
