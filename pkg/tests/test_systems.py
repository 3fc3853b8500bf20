import json

import numpy as np
import pytest

from vnls.errors import BadEntries, NotHermitian
from vnls.fields import Field, Trajectory
from vnls.grid import make_grid
from vnls.initial_data import gaussian
from vnls.nonlinear import NLSProblem, split_step_evolve
from vnls.systems import (
    SystemSpec,
    build_coupling,
    component_mass_series,
    dense_matrix,
    load_matrix_file,
    save_matrix_file,
)


def test_diagonal_and_chain():
    np.testing.assert_allclose(dense_matrix(SystemSpec(3, "diagonal", [1, 2, 3])), np.diag([1, 2, 3]))
    np.testing.assert_allclose(dense_matrix(SystemSpec(2, "diagonal")), np.zeros((2, 2)))
    chain = dense_matrix(SystemSpec(3, "chain", {"diagonal": 0.5, "offdiag": [1, [0, 2]]}))
    expected = np.array([[0.5, 1, 0], [1, 0.5, 2j], [0, -2j, 0.5]])
    np.testing.assert_allclose(chain, expected)
    assert build_coupling(SystemSpec(3, "chain", {"diagonal": 0.5, "offdiag": [1, [0, 2]]})).projection_norm == 0.0


def test_dense_hermitize():
    entries = [[0, 1], [3, 0]]
    with pytest.raises(NotHermitian):
        build_coupling(SystemSpec(2, "dense", entries))
    cm = build_coupling(SystemSpec(2, "dense", entries, hermitize=True))
    np.testing.assert_allclose(cm.matrix, [[0, 2], [2, 0]])
    # ||[[0,-1],[1,0]]||_F = sqrt 2
    assert cm.projection_norm == pytest.approx(np.sqrt(2))


@pytest.mark.parametrize(
    "spec",
    [
        dict(N=0, matrix_kind="diagonal"),
        dict(N=2, matrix_kind="banded"),
        dict(N=2, matrix_kind="dense", entries=[[0, 1]]),
        dict(N=2, matrix_kind="diagonal", entries=["a", 1]),
        dict(N=2, matrix_kind="chain", entries={"diag": 1}),
        dict(N=2, matrix_kind="dense", entries=[[0, [1, 2, 3]], [0, 0]]),
    ],
)
def test_bad_entries(spec):
    with pytest.raises(BadEntries):
        build_coupling(SystemSpec(**spec))


def test_non_finite_rejected():
    with pytest.raises(BadEntries):
        build_coupling(SystemSpec(2, "diagonal", [float("nan"), 0]))


def test_matrix_file_round_trip(tmp_path, rng):
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    a = a + a.conj().T
    path = tmp_path / "A.json"
    save_matrix_file(path, a)
    np.testing.assert_array_equal(load_matrix_file(path), a)
    cm = build_coupling(SystemSpec(3, "from_file", str(path)))
    np.testing.assert_array_equal(cm.matrix, a)
    with pytest.raises(BadEntries):
        build_coupling(SystemSpec(2, "from_file", str(path)))
    bad = tmp_path / "bad.json"
    bad.write_text("[[1, 2]")
    with pytest.raises(BadEntries, match="line 1"):
        load_matrix_file(bad)
    bad.write_text(json.dumps([[1, 2], [3, 4]]))
    with pytest.raises(BadEntries):
        load_matrix_file(bad)
    with pytest.raises(BadEntries):
        load_matrix_file(tmp_path / "missing.json")


def test_rabi_oscillation():
    # constant-in-space data under A = g sigma_x: masses cos^2(g t), sin^2(g t)
    coupling = 0.8
    g = make_grid(1, 16, 4.0, 2)
    u0 = Field(g, np.tile([1.0 + 0j, 0.0], (16, 1)))
    A = build_coupling(SystemSpec(2, "chain", {"diagonal": 0, "offdiag": coupling}))
    traj = split_step_evolve(NLSProblem(g, u0, 2.0, 0.0, 2.0, 0.05, A=A))
    masses = component_mass_series(traj)
    t = traj.times
    np.testing.assert_allclose(masses[:, 0], 4.0 * np.cos(coupling * t) ** 2, atol=1e-12)
    np.testing.assert_allclose(masses[:, 1], 4.0 * np.sin(coupling * t) ** 2, atol=1e-12)


def test_diagonal_system_decouples():
    g = make_grid(1, 128, 30.0, 2)
    u0 = gaussian(g, weights=[1, 0.5j])
    A = build_coupling(SystemSpec(2, "diagonal", [1.0, -2.0]))
    traj = split_step_evolve(NLSProblem(g, u0, 2.0, 0.0, 1.0, 0.1, A=A))
    masses = component_mass_series(traj)
    np.testing.assert_allclose(masses, np.broadcast_to(masses[0], masses.shape), rtol=1e-12)


def test_component_masses_sum_to_total(rng):
    g = make_grid(2, 8, 2.0, 3)
    data = rng.standard_normal((4,) + g.shape) + 1j * rng.standard_normal((4,) + g.shape)
    traj = Trajectory(g, np.linspace(0, 1, 4), data)
    total = g.cell_volume * np.sum(np.abs(data) ** 2, axis=(1, 2, 3))
    np.testing.assert_allclose(component_mass_series(traj).sum(axis=1), total, rtol=1e-13)
