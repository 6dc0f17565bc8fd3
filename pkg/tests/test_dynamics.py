import csv
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsdicke.core import MeanFieldState, ModelParams, parity_transform
from nsdicke.dynamics import (TRAJECTORY_COLUMNS, Controls, basin_initial_state,
                              classify_attractor, detect_limit_cycle, fig3_initial_state,
                              integrate, parity_trajectory, perturbed_fixed_point)
from nsdicke.errors import AccuracyError, ParameterError
from nsdicke.stability import Verdict, classify_stability
from nsdicke.steadystate import PhaseLabel, all_fixed_points, by_label

L = PhaseLabel
P2 = ModelParams(lam=2.0)


def test_controls_validation():
    with pytest.raises(ParameterError):
        Controls(method="Euler")
    with pytest.raises(ParameterError):
        Controls(rtol=0)
    with pytest.raises(ParameterError):
        Controls(window_fraction=1.0)
    with pytest.raises(ParameterError):
        integrate(fig3_initial_state(P2), P2, 0.0)


def test_stable_fixed_point_stays_put():
    rec = by_label(all_fixed_points(P2))[L.MINUS_XFI_SR]
    traj = integrate(rec.state, P2, 100.0)
    d = np.abs(traj.y - rec.state.to_vector()).max()
    assert d < 1e-8


def test_perturbation():
    rec = by_label(all_fixed_points(P2))[L.MINUS_ZFO_N]
    assert perturbed_fixed_point(rec, 0).distance(rec.state) == 0
    s = perturbed_fixed_point(rec, 1e-3j)
    assert s.a == 1e-3j and np.all(s.s1 == rec.state.s1)
    absent = by_label(all_fixed_points(P2.replace(lam=1)))[L.PLUS_XFO_SR]
    with pytest.raises(ValueError):
        perturbed_fixed_point(absent)


@pytest.mark.parametrize("start, target", [
    (L.MINUS_ZFO_N, L.MINUS_XFI_SR),
    (L.PLUS_ZFI_N, L.PLUS_XFO_SR),
])
def test_basins(start, target):
    traj = integrate(basin_initial_state(P2, start), P2, 1000.0)
    v = classify_attractor(traj)
    assert v.kind == "fixed_point" and v.label is target
    assert v.distance < 1e-4
    assert traj.norm_drift() <= 1e-8


def test_below_threshold_relaxes_to_low_energy_state():
    p = ModelParams(lam=0.5)
    traj = integrate(basin_initial_state(p, L.PLUS_ZFO_N), p, 1000.0)
    v = classify_attractor(traj)
    assert v.kind == "fixed_point" and v.label is L.MINUS_ZFO_N


def test_above_threshold_escapes_to_xfi_pair():
    p = ModelParams(lam=1.5)
    for phase in (0.0, math.pi):
        traj = integrate(basin_initial_state(p, L.MINUS_ZFO_N, 1e-3 * np.exp(1j * phase)), p, 1000)
        v = classify_attractor(traj)
        assert v.label in (L.PLUS_XFI_SR, L.MINUS_XFI_SR)
        assert classify_stability(by_label(all_fixed_points(p))[v.label], p).verdict \
            is Verdict.STABLE


def test_unstable_fixed_point_is_not_an_attractor():
    rec = by_label(all_fixed_points(P2))[L.PLUS_ZFO_N]
    traj = integrate(rec.state, P2, 50.0)
    assert classify_attractor(traj).kind == "undecided"


def test_parity_conjugate_trajectories():
    x0 = fig3_initial_state(P2)
    a = integrate(x0, P2, 100.0, Controls(n_samples=501))
    b = integrate(parity_transform(x0), P2, 100.0, Controls(n_samples=501))
    assert np.abs(parity_trajectory(a).y - b.y).max() < 1e-8


def test_energy_conserved_without_loss():
    p = ModelParams(kappa=0.0, lam=1.3)
    traj = integrate(fig3_initial_state(p, 0.1), p, 200.0)
    e = traj.energy
    assert np.abs(e - e[0]).max() <= 1e-8 * max(1.0, abs(e[0]))


def test_convergence_order():
    # RK45 error against a tight reference falls at least like nfev^-4
    x0 = fig3_initial_state(P2, 0.05)
    ref = integrate(x0, P2, 10.0, Controls(rtol=1e-13, atol=1e-15), sample_times=[10.0]).y[-1]
    errs, costs = [], []
    for tol in (1e-5, 1e-6, 1e-7, 1e-8):
        c = Controls(method="RK45", rtol=tol, atol=tol * 1e-2, norm_tol=1e-3)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            tr = integrate(x0, P2, 10.0, c, sample_times=[10.0])
        errs.append(np.abs(tr.y[-1] - ref).max())
        costs.append(tr.n_rhs)
    slope = np.polyfit(np.log(costs), np.log(errs), 1)[0]
    assert slope <= -4.0


def test_norm_drift_guard():
    with pytest.raises(AccuracyError):
        integrate(fig3_initial_state(P2), P2, 200.0,
                  Controls(method="RK45", rtol=1e-3, atol=1e-3))


def test_fig3_limit_cycle():
    traj = integrate(fig3_initial_state(P2), P2, 1000.0, Controls(n_samples=20001))
    v = classify_attractor(traj, controls=Controls(n_samples=20001))
    assert v.kind == "limit_cycle"
    assert v.amplitude > 1e-3
    assert 3.0 < v.period < 4.0


def test_fig3_parity_image_cycles_on_the_other_side():
    traj = integrate(parity_transform(fig3_initial_state(P2)), P2, 600.0)
    v = classify_attractor(traj)
    assert v.kind == "limit_cycle"
    window = traj.y[int(0.8 * len(traj.times)):, 2]
    assert window.min() > 0


@settings(max_examples=25, deadline=None)
@given(st.floats(1.0, 20.0), st.floats(0.05, 1.0))
def test_detect_sinusoid(period, amp):
    t = np.linspace(0, 40 * period, 8001)
    got = detect_limit_cycle(t, amp * np.sin(2 * np.pi * t / period), 1e-3)
    assert got is not None
    assert got[0] == pytest.approx(period, rel=1e-2)
    assert got[1] == pytest.approx(amp, rel=1e-2)


def test_detect_rejects_spiral_and_small_signals():
    t = np.linspace(0, 200, 8001)
    spiral = 0.3 * np.sin(2 * np.pi * t / 5) * np.exp(-t / 100)
    assert detect_limit_cycle(t, spiral, 1e-3) is None
    assert detect_limit_cycle(t, 1e-5 * np.sin(t), 1e-3) is None


def test_trajectory_csv(tmp_path):
    traj = integrate(fig3_initial_state(P2), P2, 1.0, Controls(n_samples=11))
    traj.write_csv(tmp_path / "t.csv")
    with open(tmp_path / "t.csv") as fh:
        rows = [r for r in csv.reader(fh) if not r[0].startswith("#")]
    assert tuple(rows[0]) == TRAJECTORY_COLUMNS
    assert len(rows) == 12
    assert float(rows[-1][0]) == pytest.approx(1.0)
    n1, n2 = traj.norms
    assert n1[0] == pytest.approx(0.5) and n2[0] == pytest.approx(0.15)


def test_verdict_json_fields():
    traj = integrate(basin_initial_state(P2, L.MINUS_ZFO_N), P2, 1000.0)
    d = classify_attractor(traj).to_dict()
    assert d["kind"] == "fixed_point" and d["label"] == "-xFi-SR"
    assert "transient_end" in d


def test_sample_times_validation():
    with pytest.raises(ParameterError):
        integrate(MeanFieldState(0, [0, 0, -0.5], [0, 0, -0.15]), P2, 1.0,
                  sample_times=[0.5, 0.2])
