import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from adiastab.exceptions import StepBudgetError
from adiastab.generators import double_well, random_graded
from adiastab.linalg import op_norm, unitarity_defect
from adiastab.propagators import (
    epsilon_T,
    evolve,
    generators,
    intertwining_residuals,
    lhs_errors,
    static_lhs,
    unitarity_report,
    verify_vad_prime,
)


def test_static_family_is_exact(dw_const):
    T = 37.0
    props = evolve(dw_const, T, which=("U", "V"), n_report=5)
    exact = expm(-1j * T * dw_const.A(0.0))
    assert op_norm(props.final("U") - exact) < 1e-10
    assert op_norm(props.final("V") - expm(-1j * T * dw_const.blocks(0).H)) < 1e-10


def test_against_scipy_ode(rng):
    fam = random_graded(4, seed=11)
    T = 5.0
    props = evolve(fam, T, which=("U",), tol_step=1e-10, n_report=3)

    def rhs(s, y):
        Y = y.reshape(4, 4)
        return (-1j * T * fam.A(s) @ Y).ravel()

    sol = solve_ivp(rhs, (0, 1), np.eye(4, dtype=complex).ravel(), method="DOP853", rtol=1e-12, atol=1e-12)
    ref = sol.y[:, -1].reshape(4, 4)
    # the accumulated estimate bounds the true global error
    assert op_norm(props.final("U") - ref) <= props.step_error_estimate
    assert props.step_error_estimate < 1e-6


def test_reporting_grid_and_unitarity(rot):
    props = evolve(rot, 10.0, n_report=9)
    assert np.allclose(props.s_grid, np.linspace(0, 1, 9))
    assert unitarity_report(props) < 1e-9
    for w in props.names:
        assert np.array_equal(props[w][0], np.eye(4))
    assert set(props.summary()) >= {"T", "n_steps", "step_error_estimate"}


def test_generators_double_well(dw):
    g = generators(dw, 0.5, 2.0)
    b = dw.blocks(0.5)
    assert np.allclose(g["U"], 2 * b.A)
    assert np.allclose(g["V"], 2 * b.H)
    # no coupling outside the ground spaces
    assert np.allclose(g["U_perp"], 2 * b.H)
    # H' shifts Sbar down by mubar - mu = 0.2
    assert np.allclose(np.diag(g["U_perp_prime"]).real, 2 * np.array([0, 1, 0, 1]))
    # P_mu is constant, so V_ad = V
    assert np.allclose(g["V_ad"], g["V"])


def test_adiabatic_generator_transports_projector(rot):
    props = evolve(rot, 10.0, which=("V_ad",), n_report=17)
    assert np.max(intertwining_residuals(rot, props)) < 1e-6


def test_v_ad_prime_matches_on_ground_space(rot):
    diff, err = verify_vad_prime(rot, 10.0)
    assert diff < 1e-6 + 10 * err


def test_static_lhs_matches_integrator(dw_const):
    T = 100.0
    props = evolve(dw_const, T, n_report=5)
    L = lhs_errors(dw_const, T, props)
    assert L.main == pytest.approx(static_lhs(dw_const, T), abs=1e-6)
    assert L.static == static_lhs(dw_const, T)


def test_leakage_shrinks_with_T(dw):
    eps = []
    for T in (10.0, 100.0):
        props = evolve(dw, T, n_report=33)
        eps.append(epsilon_T(dw, T, props).value)
    assert eps[1] < eps[0]


def test_step_budget(dw):
    with pytest.raises(StepBudgetError):
        evolve(dw, 1000.0, max_steps=5)


def test_step_budget_from_environment(dw, monkeypatch):
    monkeypatch.setenv("ADIASTAB_MAX_STEPS", "5")
    with pytest.raises(StepBudgetError):
        evolve(dw, 1000.0)


@pytest.mark.parametrize("T", [0.0, -1.0, np.inf])
def test_bad_T(dw, T):
    with pytest.raises(ValueError):
        evolve(dw, T)


def test_unknown_propagator(dw):
    with pytest.raises(ValueError):
        evolve(dw, 1.0, which=("W",))


def test_error_estimate_tracks_tolerance():
    fam = double_well(0.05, rotation=1.0)
    coarse = evolve(fam, 50.0, which=("U",), tol_step=1e-6, n_report=3)
    fine = evolve(fam, 50.0, which=("U",), tol_step=1e-9, n_report=3)
    diff = op_norm(coarse.final("U") - fine.final("U"))
    assert diff <= 5 * coarse.step_error_estimate + fine.step_error_estimate
    assert unitarity_defect(fine.final("U")) < 1e-9
