import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vnls.errors import EmptyTrajectory, InadmissiblePair, InvalidExponent, InvalidField, MatrixMismatch, ShapeMismatch
from vnls.fields import (
    Field,
    Trajectory,
    energy,
    lp_norm,
    mass,
    mixed_norm,
    sobolev_norm,
    strichartz_norm,
)
from vnls.grid import make_grid
from vnls.nonlinear import NLSProblem, split_step_evolve
from vnls.initial_data import gaussian

from conftest import random_samples


def const_field(g, vec):
    return Field(g, np.broadcast_to(np.asarray(vec, dtype=complex), g.shape).copy())


def test_field_rejects_nonfinite():
    g = make_grid(1, 8, 1.0)
    bad = np.zeros(g.shape, dtype=complex)
    bad[3, 0] = np.nan
    with pytest.raises(InvalidField):
        Field(g, bad)
    with pytest.raises(ShapeMismatch):
        Field(g, np.zeros((8, 2)))


def test_lp_norm_examples(rng):
    g = make_grid(2, 16, 3.0, 2)
    u = const_field(g, [3, 4])
    assert lp_norm(u, math.inf) == pytest.approx(5.0)
    assert lp_norm(u, 2) == pytest.approx(5.0 * 3.0)
    v = Field(g, random_samples(rng, g))
    assert lp_norm(v, math.inf) == pytest.approx(np.max(np.linalg.norm(v.samples, axis=-1)))
    with pytest.raises(InvalidExponent):
        lp_norm(v, 0.5)


def test_mixed_norm_examples(rng):
    g = make_grid(1, 32, 4.0)
    u = Field(g, random_samples(rng, g))
    T, K = 2.0, 20
    traj = Trajectory(g, np.linspace(0, T, K + 1), np.stack([u.samples] * (K + 1)))
    for q, r in [(4, 2), (3, 6), (8, 4)]:
        assert mixed_norm(traj, q, r) == pytest.approx(T ** (1 / q) * lp_norm(u, r), rel=1e-12)
    scales = np.linspace(0.5, 2, K + 1)
    traj = Trajectory(g, np.linspace(0, T, K + 1), scales[:, None, None] * u.samples)
    assert mixed_norm(traj, math.inf, 2) == pytest.approx(2 * lp_norm(u, 2))


def test_mixed_norm_of_time_spike_vanishes():
    g = make_grid(1, 16, 1.0)
    values = []
    for K in (10, 100, 1000):
        data = np.zeros((K + 1,) + g.shape, dtype=complex)
        data[K // 2] = 1.0
        values.append(mixed_norm(Trajectory(g, np.linspace(0, 1, K + 1), data), 2, 2))
    assert values[0] > values[1] > values[2]
    assert values[2] < 0.05


def test_trajectory_invariants():
    g = make_grid(1, 8, 1.0)
    with pytest.raises(ShapeMismatch):
        Trajectory(g, [0.0, 0.1, 0.3], np.zeros((3,) + g.shape))
    with pytest.raises(EmptyTrajectory):
        Trajectory.from_frames([])


def test_sobolev_norms():
    g = make_grid(1, 128, 2 * np.pi)
    k0 = 3
    mode = Field.from_function(g, lambda x: np.exp(1j * k0 * x))
    for s in (0.5, 1.0, 2.0):
        assert sobolev_norm(mode, s, 2, homogeneous=True) == pytest.approx(k0**s * lp_norm(mode, 2), rel=1e-12)
    u = gaussian(make_grid(1, 256, 40.0))
    assert sobolev_norm(u, 0, 3) == lp_norm(u, 3)
    # direct oracle for s = 2: (1 - Laplacian) u with u'' from the closed form
    x = u.grid.x_axis
    direct = (1 - (x**2 - 1)) * np.exp(-(x**2) / 2)
    oracle = np.sqrt(u.grid.h * np.sum(np.abs(direct) ** 2))
    assert sobolev_norm(u, 2, 2) == pytest.approx(oracle, rel=1e-10)


def test_mass():
    g = make_grid(2, 16, 3.0, 2)
    assert mass(Field.zeros(g)) == 0.0
    assert mass(const_field(g, [1, 1j])) == pytest.approx(2 * 9.0)


def test_energy_examples():
    g = make_grid(1, 64, 2 * np.pi)
    assert energy(Field.zeros(g), 2, 1.0) == 0.0
    a, k0 = 0.7, 4
    mode = Field.from_function(g, lambda x: a * np.exp(1j * k0 * x))
    assert energy(mode, 2, 0.0) == pytest.approx(0.5 * k0**2 * a**2 * 2 * np.pi, rel=1e-12)
    with pytest.raises(MatrixMismatch):
        energy(mode, 2, 1.0, np.eye(2))


def test_energy_drift_is_second_order():
    g = make_grid(1, 256, 40.0)
    drifts = []
    for dt in (2e-3, 1e-3):
        prob = NLSProblem(g, gaussian(g), 2.0, -1.0, 1.0, dt)
        traj = split_step_evolve(prob)
        e = [energy(f, 2.0, -1.0) for f in traj.frames]
        drifts.append(max(abs(v - e[0]) for v in e))
    assert 3.5 <= drifts[0] / drifts[1] <= 4.5


def test_strichartz_norm_examples(rng):
    g = make_grid(1, 32, 4.0)
    u = Field(g, random_samples(rng, g))
    traj = Trajectory(g, np.linspace(0, 1, 11), np.stack([u.samples * (1 + 0.1 * k) for k in range(11)]))
    assert strichartz_norm(traj, [("inf", 2)]).value == pytest.approx(2 * lp_norm(u, 2))
    const = Trajectory(g, np.linspace(0, 2, 11), np.stack([u.samples] * 11))
    table = strichartz_norm(const, [("inf", 2), (8, 4)])
    assert table.value == pytest.approx(max(lp_norm(u, 2), 2 ** (1 / 8) * lp_norm(u, 4)))
    assert set(table.as_dict()) == {"(inf,2)", "(8,4)"}
    with pytest.raises(InadmissiblePair):
        strichartz_norm(const, [(4, 2)])


@given(seed=st.integers(0, 2**32 - 1), c=st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3))
def test_homogeneity(seed, c):
    rng = np.random.default_rng(seed)
    g = make_grid(1, 16, 2.0, 2)
    u = Field(g, random_samples(rng, g))
    for p in (1, 2, 3.5, math.inf):
        assert lp_norm(u * c, p) == pytest.approx(abs(c) * lp_norm(u, p), rel=1e-12)
    traj = Trajectory(g, np.linspace(0, 1, 5), np.stack([u.samples * k for k in range(1, 6)]))
    scaled = traj.map_frames(lambda d: c * d)
    assert mixed_norm(scaled, 4, 3) == pytest.approx(abs(c) * mixed_norm(traj, 4, 3), rel=1e-12)
    assert strichartz_norm(scaled).value == pytest.approx(abs(c) * strichartz_norm(traj).value, rel=1e-12)


@given(seed=st.integers(0, 2**32 - 1), p=st.floats(1, 8))
def test_triangle_and_mass(seed, p):
    rng = np.random.default_rng(seed)
    g = make_grid(2, 8, 2.0, 3)
    u, v = Field(g, random_samples(rng, g)), Field(g, random_samples(rng, g))
    assert lp_norm(u + v, p) <= lp_norm(u, p) + lp_norm(v, p) + 1e-12
    assert mass(u) == pytest.approx(lp_norm(u, 2) ** 2, rel=1e-12)
    tu = Trajectory(g, [0.0, 0.5, 1.0], np.stack([u.samples, v.samples, u.samples]))
    tv = Trajectory(g, [0.0, 0.5, 1.0], np.stack([v.samples, u.samples, u.samples]))
    tw = Trajectory(g, [0.0, 0.5, 1.0], tu.data + tv.data)
    assert mixed_norm(tw, p, 2) <= mixed_norm(tu, p, 2) + mixed_norm(tv, p, 2) + 1e-12


@given(seed=st.integers(0, 2**32 - 1), p=st.floats(1.1, 10), q=st.floats(1.1, 10))
def test_holder(seed, p, q):
    rng = np.random.default_rng(seed)
    g = make_grid(1, 64, 3.0)
    u, v = Field(g, random_samples(rng, g)), Field(g, random_samples(rng, g))
    r = 1 / (1 / p + 1 / q)
    prod = Field(g, u.samples * v.samples)
    if r >= 1:
        assert lp_norm(prod, r) <= lp_norm(u, p) * lp_norm(v, q) * (1 + 1e-12)
