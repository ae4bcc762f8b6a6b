import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adiastab import linalg
from adiastab.exceptions import HermitianError, NotPSDError
from conftest import N2, hermitian_matrices


def test_eigh_two_level_closed_form():
    es = linalg.eigh(N2)
    r = np.sqrt(1.04)
    assert np.allclose(es.values, [(1 - r) / 2, (1 + r) / 2], atol=1e-15)
    assert es.values[0] == pytest.approx(-0.0099019514, abs=1e-10)


def test_eigh_rejects_non_hermitian():
    with pytest.raises(HermitianError):
        linalg.eigh(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_eigh_degenerate_cluster():
    es = linalg.eigh(np.diag([1.0, 1.0, 2.0]))
    assert es.clusters(1e-9) == [[0, 1], [2]]
    P = es.projector([0, 1])
    assert np.allclose(P, np.diag([1, 1, 0]))


def test_op_norm_two_level():
    # singular values of a symmetric matrix are |eigenvalues|
    assert linalg.op_norm(N2) == pytest.approx((1 + np.sqrt(1.04)) / 2, rel=1e-14)
    assert linalg.op_norm(np.zeros((3, 3))) == 0.0


def test_op_norm_rejects_nan():
    with pytest.raises(ValueError):
        linalg.op_norm(np.array([[np.nan, 0], [0, 1]]))


def test_psd_sqrt_scaled_projector():
    v = np.array([1.0, 1.0j]) / np.sqrt(2)
    P = np.outer(v, v.conj())
    assert np.allclose(linalg.psd_sqrt(2 * P), np.sqrt(2) * P, atol=1e-14)


def test_psd_sqrt_rejects_negative():
    with pytest.raises(NotPSDError):
        linalg.psd_sqrt(np.diag([1.0, -0.5]))


def test_unitary_exp_pauli_x_series():
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    tau = np.pi / 2
    # Taylor series as an independent oracle
    term = np.eye(2, dtype=complex)
    series = term.copy()
    for k in range(1, 60):
        term = term @ (-1j * tau * X) / k
        series = series + term
    U = linalg.unitary_exp(X, tau)
    assert np.allclose(U, series, atol=1e-13)
    assert np.allclose(U, -1j * X, atol=1e-14)


@given(hermitian_matrices())
def test_eigh_reconstructs(A):
    es = linalg.eigh(A)
    V = es.vectors
    assert np.allclose((V * es.values) @ V.conj().T, A, atol=1e-10)
    assert np.all(np.diff(es.values) >= -1e-12)


@given(hermitian_matrices(), st.floats(-5, 5))
def test_unitary_exp_is_unitary(A, tau):
    U = linalg.unitary_exp(A, tau)
    assert linalg.unitarity_defect(U) < 1e-12


@given(hermitian_matrices())
def test_psd_sqrt_squares_back(A):
    B = A @ A
    R = linalg.psd_sqrt(B)
    assert np.allclose(R @ R, B, atol=1e-8 * (1 + linalg.op_norm(B)))


@given(hermitian_matrices(n_min=3))
def test_reduced_resolvent_annihilates_ground(A):
    es = linalg.eigh(A)
    R = linalg.reduced_resolvent(es.values, es.vectors, [0])
    v0 = es.vectors[:, 0]
    assert np.allclose(R @ v0, 0, atol=1e-10)
    Q = np.eye(A.shape[0]) - np.outer(v0, v0.conj())
    # (A - e0) R = Q on the complement
    assert np.allclose((A - es.values[0] * np.eye(A.shape[0])) @ R, Q, atol=1e-8)


def test_polar_unitary_recovers_unitary(rng):
    U = linalg.unitary_exp(np.diag([0.3, -1.0, 2.0]), 1.0)
    U2 = linalg.polar_unitary(U + 1e-7 * rng.normal(size=(3, 3)))
    assert linalg.unitarity_defect(U2) < 1e-13
    assert linalg.op_norm(U2 - U) < 1e-6


def test_matrix_json_round_trip(rng):
    A = 0.5 * (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    A = A + A.conj().T
    B = linalg.matrix_from_json(linalg.matrix_to_json(A))
    assert np.array_equal(A, B)


def test_matrix_json_rejects_bad_shape():
    with pytest.raises(ValueError):
        linalg.matrix_from_json({"dim": 2, "entries": [[0, 1]]})


def test_coordinate_projector_and_rank():
    P = linalg.coordinate_projector(4, [0, 2])
    assert linalg.is_projector(P)
    assert linalg.projector_rank(P) == 2
