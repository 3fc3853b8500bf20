import json
import math

import numpy as np
import pytest

from vnls.errors import WindowInvalid
from vnls.fields import Trajectory
from vnls.grid import make_grid
from vnls.initial_data import gaussian
from vnls.nonlinear import NLSProblem, PicardConfig, split_step_evolve
from vnls.verification import (
    AuditReport,
    EnsembleSpec,
    amplitude_scan,
    chainrule_report,
    conservation_audit,
    contraction_threshold,
    dispersive_audit,
    effective_frequency,
    evaluate_checks,
    fit_decay_exponent,
    lipschitz_report,
    load_thresholds,
    maximal_ratio_sample,
    smallness_certificate,
    square_function_ratio_sample,
    strichartz_audit,
    wraparound_tmax,
)

G1 = make_grid(1, 1024, 80.0)


def window(u0, lo=0.25):
    t_max = wraparound_tmax(u0)
    return np.geomspace(lo * t_max, t_max, 9)


def small_problem(amplitude=1.0, lam=1.0, T=1.0, dt=1e-2):
    g = make_grid(1, 256, 40.0)
    return NLSProblem(g, gaussian(g) * amplitude, 2.0, lam, T, dt, picard=PicardConfig(k_max=100, tol=1e-12))


def test_threshold_file_is_complete():
    cfg = load_thresholds()
    for section in ("dispersive", "strichartz", "conservation", "smallness", "chainrule", "lipschitz"):
        assert section in cfg
    cfg["strichartz"]["max_quotient"] = -1
    assert load_thresholds()["strichartz"]["max_quotient"] == 2.0


def test_evaluate_checks():
    assert evaluate_checks({"a": 1.0, "b": 5.0}, {"max:a": 1.0, "min:b": 4.0})
    assert not evaluate_checks({"a": 1.1}, {"max:a": 1.0})
    assert not evaluate_checks({"a": float("nan")}, {"max:a": 1.0})
    assert not evaluate_checks({}, {"max:a": 1.0})
    with pytest.raises(ValueError):
        evaluate_checks({"a": 0}, {"eq:a": 0})


def test_report_pass_is_recomputable():
    rep = AuditReport("lipschitz", {}, {"max_ratio": 1.2}, {"max:max_ratio": 1.55})
    assert rep.passed
    rep.quantities["max_ratio"] = 3.0
    assert not rep.recompute_pass()
    d = json.loads(json.dumps(rep.as_dict()))
    assert evaluate_checks(d["quantities"], d["thresholds"]) is False
    with pytest.raises(ValueError):
        AuditReport("nope", {}, {}, {})


def test_effective_frequency_and_window():
    u0 = gaussian(G1)
    # |u0_hat|^2 ~ exp(-xi^2): the 99.9% radius solves erf(xi) = 0.999
    xi = effective_frequency(u0)
    assert xi == pytest.approx(2.326, abs=2 * 2 * np.pi / 80)
    assert wraparound_tmax(u0) == pytest.approx(80 / (4 * xi))


@pytest.mark.parametrize("p, expected", [("inf", -0.5), (4, -0.25), (2, 0.0)])
def test_gaussian_decay_slopes(p, expected):
    rep = fit_decay_exponent(gaussian(G1), 1, p, t_grid=window(gaussian(G1)))
    assert rep.expected_slope == expected
    assert rep.window_valid
    assert rep.passed
    assert abs(rep.fitted_slope - expected) <= max(0.1 * abs(expected), 0.02)


def test_decay_in_two_dimensions():
    g = make_grid(2, 256, 80.0)
    u0 = gaussian(g)
    rep = fit_decay_exponent(u0, 2, "inf", t_grid=window(u0))
    assert rep.expected_slope == -1.0
    assert rep.passed


def test_window_invalid():
    u0 = gaussian(G1)
    bad = [wraparound_tmax(u0), 3 * wraparound_tmax(u0)]
    with pytest.raises(WindowInvalid):
        fit_decay_exponent(u0, 1, "inf", t_grid=bad)
    audit = dispersive_audit(u0, "inf", t_grid=bad)
    assert audit.quantities["window_valid"] == 0.0 and not audit.passed
    with pytest.raises(ValueError):
        fit_decay_exponent(u0, 2, "inf", t_grid=window(u0))


def test_dispersive_audit_alpha_note():
    g = make_grid(1, 1024, 80.0, 2)
    u0 = gaussian(g, weights=[1, 1])
    audit = dispersive_audit(u0, "inf", alpha=0.5, A=np.diag([1.0, 2.0]), mu=0.5, t_grid=window(u0))
    assert audit.notes
    # the weight is bounded and t-independent, so only the alpha = 0 slope is seen
    assert audit.quantities["fitted_slope"] == pytest.approx(-0.5, abs=0.05)


def test_strichartz_audit_sharp_pairs():
    g = make_grid(1, 256, 40.0)
    ens = EnsembleSpec(count=8, family="gaussian", seed=3, grid=g, steps=100)
    energy = strichartz_audit(ens, ("inf", 2))
    assert energy.quantities["max_quotient"] == pytest.approx(1.0, rel=1e-12)
    rep = strichartz_audit(ens, (8, 4))
    assert rep.passed
    assert 0 < rep.quantities["median_quotient"] <= rep.quantities["max_quotient"]
    threaded = strichartz_audit(EnsembleSpec(8, "gaussian", 3, g, 100, workers=4), (8, 4))
    assert threaded.quantities == rep.quantities


def test_strichartz_endpoint_note():
    g = make_grid(3, 16, 12.0)
    rep = strichartz_audit(EnsembleSpec(2, "gaussian", 0, g, steps=20), (2, 6), T=0.5)
    assert any("endpoint" in note for note in rep.notes)


def test_conservation_audit_and_corruption():
    prob = small_problem(lam=-1.0)
    traj = split_step_evolve(prob)
    rep = conservation_audit(traj, prob)
    assert rep.passed
    assert rep.quantities["mass_drift"] <= 1e-12
    data = traj.data.copy()
    data[-1] *= 1.01
    bad = conservation_audit(Trajectory(traj.grid, traj.times, data), prob)
    assert not bad.passed


def test_smallness_certificate():
    cert = smallness_certificate(small_problem(amplitude=1.0))
    assert cert.passed
    assert cert.quantities["eta_ratio"] <= 2.0
    linear = smallness_certificate(small_problem(amplitude=1.0, lam=0.0))
    assert linear.quantities["eta_ratio"] == pytest.approx(1.0, rel=1e-12)
    assert linear.quantities["bound_weighted"] == pytest.approx(1.0, rel=1e-12)
    failed = smallness_certificate(small_problem(amplitude=3.0))
    assert not failed.passed
    assert "eta too large" in failed.diagnosis


def test_amplitude_scan_and_bisection():
    prob = small_problem()
    scan = amplitude_scan(prob, [0.5, 1.0, 1.4, 1.6, 2.0])
    flags = [ok for _, ok in scan]
    # contraction holds below some amplitude and fails above it
    assert flags == sorted(flags, reverse=True)
    assert flags[0] and not flags[-1]
    lo, hi = contraction_threshold(prob, 0.5, 2.0, iterations=8)
    assert 1.4 <= lo < hi <= 1.6
    assert hi - lo <= 1.5 / 2**8 + 1e-12
    with pytest.raises(ValueError):
        contraction_threshold(prob, 1.8, 2.0, iterations=2)


def test_lipschitz_and_chainrule_reports():
    g = make_grid(1, 64, 2 * np.pi)
    for p in (0.5, 2.0, 4.0):
        assert lipschitz_report(g, p, trials=20, seed=1).passed
    rep = chainrule_report(g, 2.0, 0.5, (4, 4, 2), trials=20, seed=2)
    assert rep.passed
    assert rep.quantities["scale_deviation"] <= 1e-12


def test_maximal_and_square_samples():
    g = make_grid(1, 128, 2 * np.pi)
    cfg = load_thresholds()
    assert max(maximal_ratio_sample(g, 2.0, 10, 0)) <= cfg["maximal"]["max_ratio"]
    sq = square_function_ratio_sample(g, 2.0, 10, 0)
    assert cfg["square_function"]["p2_lower"] - 1e-12 <= min(sq)
    assert max(sq) <= cfg["square_function"]["p2_upper"] + 1e-12
    assert not any(math.isnan(v) for v in sq)
