import math

import numpy as np
import pytest
import scipy.linalg
import sympy as sp
from hypothesis import given, strategies as st

from vnls.errors import MatrixMismatch, NotHermitian, NotPositive, TimeZero
from vnls.fields import Field, mass
from vnls.grid import make_grid
from vnls.initial_data import gaussian
from vnls.propagators import (
    CouplingMatrix,
    combined_propagate,
    dispersive_ratio,
    free_propagate,
    gaussian_closed_form,
    matrix_fractional_power,
    matrix_group,
)

from conftest import random_samples


def random_hermitian(rng, N):
    a = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    return 0.5 * (a + a.conj().T)


def test_gaussian_closed_form_solves_schrodinger_symbolically():
    t, x = sp.symbols("t x", real=True)
    z = 1 + 2 * sp.I * t
    u = z ** sp.Rational(-1, 2) * sp.exp(-(x**2) / (2 * z))
    assert sp.simplify(sp.I * sp.diff(u, t) + sp.diff(u, x, 2)) == 0
    assert sp.simplify(u.subs(t, 0) - sp.exp(-(x**2) / 2)) == 0


@pytest.mark.parametrize("n, M, L", [(1, 1024, 80.0), (2, 128, 40.0)])
def test_free_flow_matches_gaussian(n, M, L):
    g = make_grid(n, M, L)
    u0 = gaussian(g)
    for t in (0.0, 0.25, 1.0):
        err = np.max(np.abs(free_propagate(u0, t).samples - gaussian_closed_form(g, t)))
        assert err <= 1e-8


def test_zero_time_is_identity(rng):
    g = make_grid(1, 32, 5.0)
    u = Field(g, random_samples(rng, g))
    assert free_propagate(u, 0.0) is u
    assert combined_propagate(u, None, 0.0) is u


def test_group_law(rng):
    g = make_grid(2, 16, 6.0, 2)
    u = Field(g, random_samples(rng, g))
    a = free_propagate(free_propagate(u, 0.3), -1.1).samples
    b = free_propagate(u, -0.8).samples
    assert np.max(np.abs(a - b)) <= 1e-11 * np.max(np.abs(u.samples))


def test_matrix_group_examples():
    assert np.allclose(matrix_group(np.zeros((3, 3)), 2.0), np.eye(3), atol=1e-15)
    d = np.array([1.0, -2.0, 0.5])
    np.testing.assert_allclose(matrix_group(np.diag(d), 0.7), np.diag(np.exp(1j * d * 0.7)), atol=1e-14)
    t = 1.3
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    series = sum(np.linalg.matrix_power(1j * X * t, k) / math.factorial(k) for k in range(30))
    expected = np.array([[np.cos(t), 1j * np.sin(t)], [1j * np.sin(t), np.cos(t)]])
    np.testing.assert_allclose(series, expected, atol=1e-12)
    np.testing.assert_allclose(matrix_group(X, t), expected, atol=1e-12)


def test_matrix_group_unitary(rng):
    A = random_hermitian(rng, 5)
    U = matrix_group(A, 2.3)
    assert np.max(np.abs(U @ U.conj().T - np.eye(5))) <= 1e-12


def test_coupling_matrix_checks(rng):
    with pytest.raises(NotHermitian):
        CouplingMatrix(np.array([[0, 1], [2, 0]]))
    with pytest.raises(NotHermitian):
        CouplingMatrix(np.array([[0, 1j], [1j, 0]]))
    A = CouplingMatrix(random_hermitian(rng, 6))
    assert A.reconstruction_error() <= 1e-10
    assert np.all(A.eigenvalues + A.mu > 0)


def test_combined_propagate_examples(rng):
    g = make_grid(1, 64, 8.0)
    u = Field(g, random_samples(rng, g))
    np.testing.assert_allclose(
        combined_propagate(u, np.zeros((1, 1)), 0.4).samples, free_propagate(u, 0.4).samples, atol=1e-15
    )
    a = 1.7
    np.testing.assert_allclose(
        combined_propagate(u, [[a]], 0.4).samples, np.exp(1j * a * 0.4) * free_propagate(u, 0.4).samples, atol=1e-13
    )
    with pytest.raises(MatrixMismatch):
        combined_propagate(u, np.eye(2), 0.4)


def test_combined_matches_per_mode_exponentials(rng):
    g = make_grid(1, 32, 5.0, 3)
    A = random_hermitian(rng, 3)
    u = Field(g, random_samples(rng, g))
    t = 0.6
    spec = np.fft.fft(u.samples, axis=0)
    out = np.empty_like(spec)
    for k, xi in enumerate(g.xi_axis):
        out[k] = scipy.linalg.expm(1j * (A - xi**2 * np.eye(3)) * t) @ spec[k]
    oracle = np.fft.ifft(out, axis=0)
    assert np.max(np.abs(combined_propagate(u, A, t).samples - oracle)) <= 1e-10 * np.max(np.abs(oracle))


def test_commutation(rng):
    g = make_grid(2, 16, 4.0, 2)
    A = random_hermitian(rng, 2)
    u = random_samples(rng, g)
    t = 0.9
    U = matrix_group(A, t)
    mult = np.exp(-1j * g.xi_sq * t)
    first = g.apply_multiplier(u @ U.T, mult)
    second = g.apply_multiplier(u, mult) @ U.T
    assert np.max(np.abs(first - second)) <= 1e-12 * np.max(np.abs(u))


def test_fractional_power(rng):
    A = random_hermitian(rng, 4)
    cm = CouplingMatrix(A)
    np.testing.assert_allclose(matrix_fractional_power(cm, None, 0.0), np.eye(4))
    np.testing.assert_allclose(matrix_fractional_power(np.diag([1.0, 4.0]), 0.0, 0.5), np.diag([1.0, 2.0]), atol=1e-14)
    root = matrix_fractional_power(cm, cm.mu, 0.5)
    np.testing.assert_allclose(root @ root, A + cm.mu * np.eye(4), atol=1e-10)
    with pytest.raises(NotPositive):
        matrix_fractional_power(np.diag([-1.0, 1.0]), 0.5, 0.5)


def test_dispersive_ratio_examples(rng):
    g = make_grid(1, 256, 40.0)
    u = gaussian(g)
    for t in (0.5, 2.0, -1.0):
        assert dispersive_ratio(u, t, 2) == pytest.approx(1.0, rel=1e-12)
        assert dispersive_ratio(u * (3 - 2j), t, "inf") == pytest.approx(dispersive_ratio(u, t, "inf"), rel=1e-12)
    with pytest.raises(TimeZero):
        dispersive_ratio(u, 0.0, 2)
    with pytest.raises(ZeroDivisionError):
        dispersive_ratio(Field.zeros(g), 1.0, 2)


def test_dispersive_ratio_times_sqrt_t_levels_off():
    g = make_grid(1, 1024, 80.0)
    u = gaussian(g)
    scaled = [dispersive_ratio(u, t, "inf") * math.sqrt(t) for t in (2.0, 4.0, 6.0)]
    # oracle: sup |u(t)| = |1+2it|^{-1/2} and ||u0||_1 = sqrt(2 pi)
    oracle = [abs(1 + 2j * t) ** -0.5 * math.sqrt(t) / math.sqrt(2 * math.pi) for t in (2.0, 4.0, 6.0)]
    np.testing.assert_allclose(scaled, oracle, rtol=1e-6)
    assert abs(scaled[-1] - scaled[-2]) < 0.01 * scaled[-1]


def test_fractional_weight_is_time_independent():
    # finite-dimensional degeneracy: ||(A+mu)^alpha exp(iAt)|| is constant in t
    A = CouplingMatrix(np.diag([1.0, 2.0]))
    W = matrix_fractional_power(A, 0.0, 0.5)
    norms = [np.linalg.norm(W @ matrix_group(A, t), 2) for t in (0.1, 1.0, 10.0)]
    np.testing.assert_allclose(norms, math.sqrt(2.0), rtol=1e-12)


@given(seed=st.integers(0, 2**32 - 1), n=st.sampled_from([1, 2]), N=st.sampled_from([1, 3]), t=st.floats(-5, 5))
def test_unitarity_and_inverse(seed, n, N, t):
    rng = np.random.default_rng(seed)
    g = make_grid(n, 32 if n == 1 else 16, 6.0, N)
    u = Field(g, random_samples(rng, g))
    A = random_hermitian(rng, N)
    v = combined_propagate(u, A, t)
    assert mass(v) == pytest.approx(mass(u), rel=1e-12)
    assert mass(free_propagate(u, t)) == pytest.approx(mass(u), rel=1e-12)
    back = combined_propagate(v, A, -t)
    assert np.max(np.abs(back.samples - u.samples)) <= 1e-11 * np.max(np.abs(u.samples))
