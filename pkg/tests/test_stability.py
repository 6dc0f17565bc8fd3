import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from nsdicke.core import PARITY_DIAG, MeanFieldState, ModelParams, parity_transform, rhs_vector
from nsdicke.eigen import eigenvalues
from nsdicke.stability import (SCAN_COLUMNS, Verdict, bifurcation_scan, classify_all,
                               classify_spectrum, classify_stability, jacobian,
                               jacobian_vector, locate_crossing, stable_labels)
from nsdicke.steadystate import PhaseLabel, all_fixed_points, by_label, critical_couplings

L = PhaseLabel
P = ModelParams()
XFO, XFI = critical_couplings(P)

vectors = st.lists(st.floats(-2, 2), min_size=8, max_size=8).map(np.array)
params_st = st.builds(
    lambda wc, wa, k, lam, r: ModelParams(omega_c=wc, omega_a=wa, kappa=k, lam=lam, n2=r),
    st.floats(0.2, 3), st.floats(0.2, 3), st.floats(0.05, 3), st.floats(0.05, 4),
    st.floats(0.0, 0.95),
)


@settings(max_examples=100, deadline=None)
@given(vectors, params_st)
def test_jacobian_matches_oracles(y, p):
    J = jacobian_vector(y, p)
    args = (p.omega_c, p.omega_a, p.kappa, p.lam)
    np.testing.assert_allclose(J, oracles.symbolic_jacobian(y, *args), atol=1e-13)
    fd = oracles.fd_jacobian(lambda v: rhs_vector(v, p), y)
    np.testing.assert_allclose(J, fd, rtol=1e-6, atol=1e-6 * max(1.0, np.abs(J).max()))


def test_complex_basis_equivalence():
    # (da, da*) = T (dRe a, dIm a); the field block becomes diag(-(i wc + k), -(-i wc + k))
    p = ModelParams(omega_c=1.3, kappa=0.7, lam=0.9)
    rec = by_label(all_fixed_points(p.replace(lam=2)))[L.PLUS_XFI_SR]
    J = jacobian(rec.state, p.replace(lam=2))
    T = np.eye(8, dtype=complex)
    T[:2, :2] = [[1, 1j], [1, -1j]]
    Jc = T @ J @ np.linalg.inv(T)
    np.testing.assert_allclose(Jc[:2, :2], np.diag([-(1.3j + 0.7), -(-1.3j + 0.7)]), atol=1e-14)
    want = list(np.linalg.eigvals(J))
    for z in np.linalg.eigvals(Jc):
        k = int(np.argmin([abs(z - w) for w in want]))
        assert abs(z - want.pop(k)) < 1e-10


def test_decoupled_spectrum():
    p = ModelParams(omega_c=1.5, omega_a=0.8, kappa=0.5, lam=0.0)
    rec = by_label(all_fixed_points(p))[L.MINUS_ZFO_N]
    ev = sorted(eigenvalues(jacobian(rec.state, p)), key=lambda z: (z.real, z.imag))
    want = sorted([-0.5 + 1.5j, -0.5 - 1.5j, 0.8j, 0.8j, -0.8j, -0.8j, 0, 0],
                  key=lambda z: (z.real, z.imag))
    np.testing.assert_allclose(ev, want, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(vectors, params_st)
def test_parity_similarity(y, p):
    Pm = np.diag(PARITY_DIAG)
    J = jacobian_vector(y, p)
    Jp = jacobian(parity_transform(MeanFieldState.from_vector(y)), p)
    np.testing.assert_allclose(Jp, Pm @ J @ Pm, atol=1e-14)


@pytest.mark.parametrize("lam, stable", [
    (0.5, {L.MINUS_ZFO_N, L.MINUS_ZFI_N}),
    (1.0, {L.MINUS_ZFO_N, L.MINUS_ZFI_N}),
    (1.5, {L.MINUS_ZFI_N, L.PLUS_XFI_SR, L.MINUS_XFI_SR}),
    (2.0, {L.PLUS_XFO_SR, L.MINUS_XFO_SR, L.PLUS_XFI_SR, L.MINUS_XFI_SR}),
    (5.0, {L.PLUS_XFO_SR, L.MINUS_XFO_SR, L.PLUS_XFI_SR, L.MINUS_XFI_SR}),
])
def test_verdict_pattern(lam, stable):
    assert stable_labels(P.replace(lam=lam)) == stable


def test_report_fields():
    rep = classify_stability(by_label(all_fixed_points(P.replace(lam=2)))[L.PLUS_XFO_SR],
                             P.replace(lam=2))
    assert len(rep.eigenvalues) == 8
    assert rep.zero_modes_excluded == 2
    assert rep.verdict is Verdict.STABLE
    assert all(z.real < -1e-9 for z in rep.relevant)
    d = rep.to_dict()
    assert d["verdict"] == "stable" and len(d["eigenvalues"]) == 8
    # conjugate closure
    ims = sorted(z.imag for z in rep.eigenvalues)
    np.testing.assert_allclose(ims, sorted(-z for z in ims), atol=1e-10)


def test_parity_partners_share_spectrum():
    p = P.replace(lam=2.3)
    recs = by_label(all_fixed_points(p))
    for lab in (L.PLUS_XFO_SR, L.PLUS_XFI_SR):
        a = np.sort_complex(eigenvalues(jacobian(recs[lab].state, p)))
        b = np.sort_complex(eigenvalues(jacobian(recs[lab.parity_partner].state, p)))
        np.testing.assert_allclose(a, b, atol=1e-8)


def test_spin_normal_directions_are_annihilated():
    p = P.replace(lam=2.0)
    for rec in all_fixed_points(p):
        J = jacobian(rec.state, p)
        for k in (0, 1):
            v = np.zeros(8)
            s = rec.state.s1 if k == 0 else rec.state.s2
            v[2 + 3 * k: 5 + 3 * k] = s
            # normal perturbations never leave the tangent space: S . (J v)_spin = 0
            w = J @ v
            assert abs(np.dot(s, w[2 + 3 * k: 5 + 3 * k])) < 1e-12


def test_absent_record_rejected():
    rec = by_label(all_fixed_points(P.replace(lam=1)))[L.PLUS_XFO_SR]
    with pytest.raises(ValueError):
        classify_stability(rec, P.replace(lam=1))


def test_closed_system_is_marginal():
    p = ModelParams(kappa=0.0, lam=0.5)
    rec = by_label(all_fixed_points(p))[L.MINUS_ZFO_N]
    assert classify_stability(rec, p).verdict is Verdict.MARGINAL


def test_decoupled_normal_states_are_stable():
    reports = [rep for _, rep in classify_all(P.replace(lam=0.0)) if rep is not None]
    assert len(reports) == 4
    assert all(rep.verdict is Verdict.STABLE for rep in reports)


def test_positive_normal_states_always_unstable():
    for lam in np.linspace(0.05, 4, 40):
        recs = {r.label: rep for r, rep in classify_all(P.replace(lam=float(lam)))}
        assert recs[L.PLUS_ZFO_N].verdict is Verdict.UNSTABLE
        assert recs[L.PLUS_ZFI_N].verdict is Verdict.UNSTABLE


def test_spectrum_argument_is_used():
    J = np.diag([-1.0, -2, -3, -4, -5, -6, -7, 0])
    assert classify_spectrum(J).verdict is Verdict.STABLE  # one zero mode excluded
    fake = [1.0] + [-1.0] * 7
    assert classify_spectrum(J, spectrum=fake).verdict is Verdict.UNSTABLE


def test_scan_and_crossings():
    grid = np.linspace(0.01, 3.0, 200)
    rows = bifurcation_scan(P, grid)
    assert len(rows) == 8 * 200
    assert len(rows[0].as_tuple()) == len(SCAN_COLUMNS)
    lead = {lab: [(r.lam, r.re_lead) for r in rows if r.label is lab]
            for lab in (L.MINUS_ZFO_N, L.MINUS_ZFI_N)}
    for lab, lam_c in ((L.MINUS_ZFO_N, XFI), (L.MINUS_ZFI_N, XFO)):
        signs = [(l, f > 0) for l, f in lead[lab]]
        k = next(i for i in range(199) if not signs[i][1] and signs[i + 1][1])
        assert signs[k][0] <= lam_c <= signs[k + 1][0]
        root = locate_crossing(P, lab, signs[k][0], signs[k + 1][0])
        assert root == pytest.approx(lam_c, rel=1e-6)


def test_scan_requires_ascending_grid():
    with pytest.raises(ValueError):
        bifurcation_scan(P, [1.0, 0.5])
    with pytest.raises(ValueError):
        locate_crossing(P, L.MINUS_ZFO_N, 0.1, 0.2)


@pytest.mark.parametrize("label", [L.MINUS_ZFI_N, L.PLUS_ZFI_N])
def test_equal_sizes_jordan_block_is_unstable(label):
    # at N2 = N1 the zFi states carry a Jordan block at +-i omega_a
    p = ModelParams(n2=1.0, lam=0.5)
    J = jacobian(by_label(all_fixed_points(p))[label].state, p)
    own = classify_spectrum(J)
    lapack = classify_spectrum(J, spectrum=np.linalg.eigvals(J))
    assert own.verdict is lapack.verdict is Verdict.UNSTABLE
    assert own.defective_modes == lapack.defective_modes == 1


def test_semisimple_degeneracy_is_not_defective():
    p = ModelParams(lam=0.0)
    rep = classify_stability(by_label(all_fixed_points(p))[L.MINUS_ZFO_N], p)
    assert rep.defective_modes == 0 and rep.dark_modes_excluded == 4
