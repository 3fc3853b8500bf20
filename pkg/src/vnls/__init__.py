"""Pseudospectral solver and numerical audits for coupled nonlinear Schrodinger systems.

    i u_t + Lap u + A u + lam ||u||^p u = 0,   u(t, x) in C^N,

on a periodic box, with A a Hermitian N x N coupling matrix.
"""

__version__ = "0.1.0"

from .admissibility import (  # noqa: E402
    INF,
    AdmissiblePair,
    PairKind,
    admissible_pair,
    beta,
    classify_pair,
    classify_regularity,
    critical_exponent,
    dual_exponent,
    endpoint_pair,
    solver_exponents,
)
from .errors import VNLSError  # noqa: E402
from .fields import Field, Trajectory, energy, lp_norm, mass, mixed_norm, sobolev_norm, strichartz_norm  # noqa: E402
from .grid import GridSpec, make_grid  # noqa: E402
from .initial_data import gaussian  # noqa: E402
from .nonlinear import NLSProblem, PicardConfig, duhamel_residual, picard_iterate, split_step_evolve  # noqa: E402
from .propagators import CouplingMatrix, combined_propagate, free_propagate  # noqa: E402

__all__ = [
    "INF",
    "AdmissiblePair",
    "CouplingMatrix",
    "Field",
    "GridSpec",
    "NLSProblem",
    "PairKind",
    "PicardConfig",
    "Trajectory",
    "VNLSError",
    "admissible_pair",
    "beta",
    "classify_pair",
    "classify_regularity",
    "combined_propagate",
    "critical_exponent",
    "dual_exponent",
    "duhamel_residual",
    "endpoint_pair",
    "energy",
    "free_propagate",
    "gaussian",
    "lp_norm",
    "make_grid",
    "mass",
    "mixed_norm",
    "picard_iterate",
    "sobolev_norm",
    "solver_exponents",
    "split_step_evolve",
    "strichartz_norm",
]
