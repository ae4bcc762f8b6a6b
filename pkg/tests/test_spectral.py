import numpy as np
import pytest
from hypothesis import given, settings

from adiastab.exceptions import DegenerateGroundStateError, NonRealCheegerError
from adiastab.generators import diagonal_family, double_well, static
from adiastab.graded import Grading
from adiastab.spectral import (
    cheeger_ratio,
    ground_state,
    projector_derivatives,
    snapshot,
    verify_eigenvalue_chain,
    verify_norm_bounds,
)
from conftest import N2, graded_families

# closed form for N2: lambda0 = (1 - sqrt(1.04))/2, h = -1/(100 lambda0)
LAM0 = (1 - np.sqrt(1.04)) / 2


@pytest.fixture(scope="module")
def two_level():
    return snapshot(static(N2, [0]), 0.0)


def test_two_level_ground_energy(two_level):
    assert two_level.lam == pytest.approx(LAM0, abs=1e-15)
    assert two_level.lam == pytest.approx(-0.0099020, abs=1e-7)


def test_two_level_cheeger(two_level):
    assert two_level.h == pytest.approx(-1 / (100 * LAM0), rel=1e-12)
    assert two_level.h == pytest.approx(1.0099020, abs=1e-7)
    # the eigenvalue chain is tight: lambda + h equals mubar = 1
    assert two_level.lam + two_level.h == pytest.approx(1.0, abs=1e-12)


def test_two_level_parts():
    _, v, _ = ground_state(N2)
    h, num, ms, msb = cheeger_ratio(v, np.array([[0, -0.1], [-0.1, 0]]), Grading(2, [0]), return_parts=True)
    assert num == pytest.approx(0.0098058, abs=1e-7)
    assert min(ms, msb) == pytest.approx(0.0097097, abs=1e-7)
    assert ms + msb == pytest.approx(1.0)


def test_two_level_kappa(two_level):
    assert two_level.kappa == pytest.approx(np.sqrt(1.04), rel=1e-13)
    assert two_level.kappa == pytest.approx(1.0198039, abs=1e-7)


def test_two_level_gaps_infinite(two_level):
    assert not np.isfinite(two_level.Gamma_S)
    assert not np.isfinite(two_level.min_gap)


def test_cheeger_zero_on_diagonal_family():
    sn = snapshot(diagonal_family(), 0.5)
    assert sn.h == 0.0
    assert sn.norm_Delta == 0.0


def test_cheeger_zero_when_mass_vanishes():
    v = np.array([1.0, 0.0, 0.0])
    D = np.zeros((3, 3))
    D[0, 2] = D[2, 0] = -1.0
    assert cheeger_ratio(v, D, Grading(3, [0])) == 0.0


def test_cheeger_rejects_complex_numerator():
    v = np.array([1.0, 1.0]) / np.sqrt(2)
    D = np.array([[0, 1j], [-1j, 0]])
    with pytest.raises(NonRealCheegerError):
        cheeger_ratio(v, D, Grading(2, [0]))


def test_degenerate_ground_state_raises():
    with pytest.raises(DegenerateGroundStateError):
        ground_state(np.diag([0.0, 0.0, 1.0]))


def test_double_well_values(dw):
    sn = snapshot(dw, 0.0)
    assert sn.mu == pytest.approx(0.0)
    assert sn.mubar == pytest.approx(0.2)
    assert sn.Gamma_S == pytest.approx(1.0)
    assert sn.Gamma_Sbar == pytest.approx(1.0)
    assert sn.norm_Delta == pytest.approx(0.05)
    assert sn.c == pytest.approx(0.05)
    # Delta only couples the two local ground states, so Delta_perp = 0
    assert sn.eta == pytest.approx(1.0)
    assert sn.h > 0
    # at s = 1 the coupling has halved
    assert snapshot(dw, 1.0).norm_Delta == pytest.approx(0.025)


def test_double_well_cheeger_two_level_reduction(dw):
    # the ground state lives in the 2x2 block {0, 2}
    sub = np.array([[0.0, -0.05], [-0.05, 0.2]])
    w, V = np.linalg.eigh(sub)
    v = V[:, 0]
    num = 0.05 * abs(v[0] * v[1])
    h = num / min(v[0] ** 2, v[1] ** 2)
    assert snapshot(dw, 0.0).h == pytest.approx(h, rel=1e-10)


def test_scalars_are_complete(dw):
    sc = snapshot(dw, 0.25).scalars()
    for key in ("lambda", "gamma", "mu", "mubar", "h", "kappa", "c", "eta", "Gamma_S"):
        assert key in sc
    assert sc["rank_P_mu"] == 1


@given(graded_families(sizes=(4, 8, 16)))
@settings(max_examples=30)
def test_eigenvalue_chain(fam):
    for s in (0.0, 0.5, 1.0):
        sn = snapshot(fam, s)
        assert all(c.passed for c in verify_eigenvalue_chain(sn))
        assert sn.lam <= min(sn.mu, sn.mubar) + 1e-9


@given(graded_families(sizes=(4, 8)))
@settings(max_examples=30)
def test_section_bounds_hold(fam):
    for s in (0.0, 0.5, 1.0):
        checks = verify_norm_bounds(snapshot(fam, s))
        assert all(c.passed for c in checks)


@given(graded_families(sizes=(4, 6)))
@settings(max_examples=20)
def test_h_nonnegative_and_kappa_bounds_gamma(fam):
    sn = snapshot(fam, 0.3)
    assert sn.h >= -1e-12
    assert sn.kappa >= sn.gamma > 0
    assert sn.mass_S + sn.mass_Sbar == pytest.approx(1.0)


@given(graded_families(sizes=(4, 6)))
@settings(max_examples=15)
def test_projector_derivative_bounds(fam):
    sn = snapshot(fam, 0.4)
    pd = projector_derivatives(fam, 0.4)
    assert all(c.passed for c in pd.bound_checks(sn, 1e-9))
    # analytic and finite-difference cross terms agree
    assert pd.cross_norm == pytest.approx(pd.cross_norm_fd, abs=1e-5 * (1 + pd.cross_norm))


def test_pdot_vanishes_for_static_family(dw_const):
    pd = projector_derivatives(dw_const, 0.5)
    assert np.max(np.abs(pd.Pdot_mu)) == 0
    assert pd.mudot == 0


def test_rotating_pdot_norm(rot):
    # rotation at unit rate in the S block: ||Pdot_mu|| = omega
    pd = projector_derivatives(rot, 0.3)
    assert np.linalg.norm(pd.Pdot_mu, 2) == pytest.approx(1.0, rel=1e-10)


def test_strong_coupling_marks_section_checks_inapplicable():
    sn = snapshot(double_well(0.9, constant=True), 0.0)
    checks = verify_norm_bounds(sn)
    assert not any(c.applicable for c in checks)
