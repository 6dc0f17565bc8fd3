import json
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from nsdicke.core import MeanFieldState, ModelParams, eom_rhs, parity_transform
from nsdicke.errors import UnsupportedParameterError
from nsdicke.steadystate import (LABEL_ORDER, PhaseLabel, all_fixed_points, by_label,
                                 critical_couplings, fixed_point_count, normal_fixed_points,
                                 parent_normal_label, records_to_json, steady_observables,
                                 superradiant_fixed_points)

P = ModelParams(lam=2.0)

params_st = st.builds(
    lambda wc, wa, k, lam, r, n1: ModelParams(omega_c=wc, omega_a=wa, kappa=k, lam=lam,
                                              n1=n1, n2=r * n1),
    st.floats(0.2, 3), st.floats(0.2, 3), st.floats(0, 3), st.floats(0.01, 6),
    st.floats(0, 1), st.floats(0.5, 20),
)


def test_thresholds_against_high_precision():
    xfo, xfi = critical_couplings(P)
    assert abs(xfi - float(mpmath.sqrt(mpmath.mpf(2) / mpmath.mpf("1.3")))) <= 1e-15 * xfi
    assert abs(xfo - float(oracles.threshold(1, 1, 1, 1, 0.3, ferro=True))) <= 1e-15 * xfo
    assert xfi == pytest.approx(1.240347, abs=1e-6)
    assert xfo == pytest.approx(1.690309, abs=1e-6)


@settings(max_examples=200, deadline=None)
@given(params_st)
def test_thresholds_property(p):
    xfo, xfi = critical_couplings(p)
    ref_fi = float(oracles.threshold(p.omega_c, p.omega_a, p.kappa, p.n1, p.n2, ferro=False))
    assert xfi == pytest.approx(ref_fi, rel=1e-12)
    if p.n2 < p.n1:
        ref_fo = float(oracles.threshold(p.omega_c, p.omega_a, p.kappa, p.n1, p.n2, ferro=True))
        assert xfo == pytest.approx(ref_fo, rel=1e-10)
        assert xfo >= xfi


def test_threshold_edge_cases():
    assert math.isinf(critical_couplings(ModelParams(n2=1.0))[0])
    xfo, xfi = critical_couplings(ModelParams(n2=0.0))
    assert xfo == xfi == pytest.approx(math.sqrt(2))
    assert critical_couplings(ModelParams(kappa=0, n2=0))[1] == pytest.approx(1.0)


def test_superradiant_values_at_lambda_two():
    recs = by_label(all_fixed_points(P))
    for sign, lab in ((1, "+"), (-1, "-")):
        fo = recs[PhaseLabel(lab + "xFo-SR")].state
        fi = recs[PhaseLabel(lab + "xFi-SR")].state
        assert fo.s1[0] == pytest.approx(sign * 0.349927, abs=1e-6)
        assert fo.s2[0] == pytest.approx(sign * 0.104978, abs=1e-6)
        assert fi.s1[0] == pytest.approx(sign * 0.461538, abs=1e-6)
        assert fi.s2[0] == pytest.approx(-sign * 0.138462, abs=1e-6)
    a = recs[PhaseLabel.PLUS_XFO_SR].state.a
    assert a.real == pytest.approx(-0.244949, abs=1e-6)
    assert a.imag == pytest.approx(-0.244949, abs=1e-6)


def test_normal_states():
    recs = by_label(normal_fixed_points(ModelParams()))
    assert recs[PhaseLabel.MINUS_ZFO_N].energy == pytest.approx(-0.65)
    zfi = recs[PhaseLabel.PLUS_ZFI_N]
    assert zfi.state.s1[2] + zfi.state.s2[2] == pytest.approx(0.35)
    assert zfi.energy == pytest.approx(0.35)
    for rec in recs.values():
        assert np.all(eom_rhs(rec.state, ModelParams(lam=3)).to_vector() == 0)


@pytest.mark.parametrize("lam, count", [(1.0, 4), (1.5, 6), (2.0, 8)])
def test_counts(lam, count):
    assert fixed_point_count(ModelParams(lam=lam)) == count
    assert len(all_fixed_points(ModelParams(lam=lam))) == 8


def test_below_threshold_records_are_absent():
    recs = by_label(all_fixed_points(ModelParams(lam=1.0)))
    assert not recs[PhaseLabel.PLUS_XFI_SR].exists
    assert recs[PhaseLabel.PLUS_XFI_SR].state is None
    assert math.isnan(steady_observables(recs[PhaseLabel.PLUS_XFI_SR])["Sx"])


@settings(max_examples=200, deadline=None)
@given(params_st)
def test_fixed_point_invariants(p):
    for rec in all_fixed_points(p):
        if not rec.exists:
            continue
        s = rec.state
        scale = max(1.0, p.n1, p.lam * p.n1)
        assert np.max(np.abs(eom_rhs(s, p).to_vector())) <= 1e-10 * scale
        n1, n2 = s.norms()
        assert n1 == pytest.approx(p.n1 / 2, abs=1e-12 * p.n1)
        assert n2 == pytest.approx(p.n2 / 2, abs=1e-12 * p.n1)
        assert s.s1[1] == 0 and s.s2[1] == 0
        if rec.label.is_superradiant and p.n2 > 0 and abs(s.s2[2]) > 1e-9 * p.n1:
            # S1x / S2x = -S1z / S2z
            assert s.s1[0] * s.s2[2] == pytest.approx(-s.s1[2] * s.s2[0], rel=1e-12, abs=1e-14)


def test_parity_pairs():
    recs = by_label(all_fixed_points(P))
    for lab in LABEL_ORDER:
        if lab.is_superradiant:
            mirrored = parity_transform(recs[lab].state)
            assert mirrored.distance(recs[lab.parity_partner].state) <= 1e-14


def test_monotone_and_saturating():
    lams = np.linspace(1.70, 20, 200)
    s1x = [by_label(all_fixed_points(ModelParams(lam=l)))[PhaseLabel.PLUS_XFO_SR].state.s1[0]
           for l in lams]
    assert np.all(np.diff(s1x) > 0)
    big = by_label(all_fixed_points(ModelParams(lam=1e3)))
    assert big[PhaseLabel.PLUS_XFO_SR].state.s1[0] == pytest.approx(0.5, abs=1e-6)


@pytest.mark.parametrize("label", [PhaseLabel.PLUS_XFO_SR, PhaseLabel.PLUS_XFI_SR])
def test_continuity_at_threshold(label):
    xfo, xfi = critical_couplings(P)
    lam_c = xfo if "Fo" in label.value else xfi
    p = P.replace(lam=lam_c * (1 + 1e-6))
    recs = by_label(all_fixed_points(p))
    sr, parent = recs[label], recs[parent_normal_label(label)]
    o_sr, o_n = steady_observables(sr), steady_observables(parent)
    assert o_sr["Sz"] == pytest.approx(o_n["Sz"], abs=1e-4)
    assert o_sr["E0"] == pytest.approx(o_n["E0"], abs=1e-4)


def test_exactly_at_threshold_coincides_with_parent():
    xfo, _ = critical_couplings(P)
    recs = by_label(all_fixed_points(P.replace(lam=xfo)))
    sr = recs[PhaseLabel.PLUS_XFO_SR]
    assert sr.exists
    assert sr.state.distance(recs[parent_normal_label(sr.label)].state) <= 1e-12


def test_other_sign_choices_are_not_fixed_points():
    # flipping either S_z sign of an SR solution leaves a finite residual
    for rec in superradiant_fixed_points(P):
        for flip in ((-1, 1), (1, -1), (-1, -1)):
            s = rec.state
            alt = MeanFieldState(s.a, s.s1 * [1, 1, flip[0]], s.s2 * [1, 1, flip[1]])
            assert np.max(np.abs(eom_rhs(alt, P).to_vector())) > 1e-3


def test_equal_sizes_display_label():
    recs = by_label(all_fixed_points(ModelParams(lam=2.0, n2=1.0)))
    rec = recs[PhaseLabel.PLUS_XFI_SR]
    assert rec.display_label == "+xaF-SR"
    assert not recs[PhaseLabel.PLUS_XFO_SR].exists


def test_omega_a_zero_is_refused():
    with pytest.raises(UnsupportedParameterError):
        all_fixed_points(ModelParams(omega_a=0, lam=1))


def test_json_schema():
    data = records_to_json(all_fixed_points(ModelParams(lam=1.0)))
    assert len(data) == 8
    keys = ["label", "exists", "a_re", "a_im", "s1x", "s1y", "s1z", "s2x", "s2y", "s2z", "energy"]
    assert all(list(d)[:len(keys)] == keys for d in data)
    text = json.dumps(data)
    assert "NaN" not in text


def test_brute_force_finds_no_extra_roots():
    p = ModelParams(omega_c=0.8, omega_a=1.4, kappa=0.6, lam=2.5, n1=1.0, n2=0.55)
    roots = oracles.brute_force_fixed_points(p.omega_c, p.omega_a, p.kappa, p.lam, p.n1, p.n2)
    analytic = [r.state.to_vector() for r in all_fixed_points(p) if r.exists]
    assert len(roots) == len(analytic)
    for y in roots:
        assert min(np.max(np.abs(y - a)) for a in analytic) < 1e-6
