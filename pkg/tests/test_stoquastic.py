import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adiastab.exceptions import CutSizeError
from adiastab.generators import double_well, frustrated_triangle, random_graded, transverse_chain
from adiastab.graded import Grading
from adiastab.spectral import cheeger_ratio, ground_state, snapshot
from adiastab.stoquastic import (
    _cut_masks,
    balance_and_gamma_tilde,
    canonical_cut,
    cut_profile,
    min_cut,
    off_diagonal_row_sum,
    sign_gauge,
)
from conftest import N2, graded_families


def test_mask_enumeration_covers_each_pair_once():
    n = 5
    masks = _cut_masks(n)
    assert len(masks) == 2 ** (n - 1) - 1
    reps = {canonical_cut(np.flatnonzero(m), n) for m in masks}
    assert len(reps) == len(masks)


def test_canonical_cut():
    assert canonical_cut([1, 2, 3], 4) == (0,)
    assert canonical_cut([2, 3], 4) == (0, 1)
    assert canonical_cut([0, 1], 4) == (0, 1)
    with pytest.raises(ValueError):
        canonical_cut([0, 1, 2, 3], 4)


def test_two_level_min_cut():
    r = min_cut(N2)
    assert r.best_cut == (0,)
    assert r.evaluated_cuts == 1
    assert r.h_min == pytest.approx(snapshot_h_two_level(), rel=1e-12)


def snapshot_h_two_level():
    lam0 = (1 - np.sqrt(1.04)) / 2
    return -1 / (100 * lam0)


def test_double_well_min_cut():
    # level 1 carries no ground-state weight or coupling: h = 0
    r = min_cut(double_well(0.05), 9)
    assert r.best_cut == (1,)
    assert r.h_min == 0.0
    assert set(r.ties) == {(3,), (0, 2)}


def test_disconnected_component_cut():
    A = np.array([[0.0, -0.1, 0.0], [-0.1, 1.0, 0.0], [0.0, 0.0, 2.0]])
    r = min_cut(A)
    assert r.best_cut == (2,)
    assert r.h_min == 0.0


def test_disconnected_family_has_zero_cheeger_constant():
    r = min_cut(np.diag([0.0, 1.0, 2.0, 3.0]) - 0.1 * np.kron(np.eye(2), [[0, 1], [1, 0]]))
    assert r.h_min == 0.0
    # the ground state lives on {0, 1}; a singleton outside it carries no mass
    assert r.best_cut == (2,)
    assert (0, 1) in r.ties


@given(graded_families(sizes=(4, 6), stoquastic=True))
@settings(max_examples=15)
def test_min_cut_matches_brute_force(fam):
    grid = [0.0, 0.5, 1.0]
    r = min_cut(fam, grid)
    n = fam.dim
    best = np.inf
    for k in range(1, n):
        for S in itertools.combinations(range(n), k):
            g = Grading(n, S)
            worst = -np.inf
            for s in grid:
                _, v, _ = ground_state(fam.A(s))
                worst = max(worst, cheeger_ratio(v, np.where(g.offdiag_mask, fam.A(s), 0), g))
            best = min(best, worst)
    assert r.h_min == pytest.approx(best, abs=1e-10)


def test_cut_profile_matches_snapshot():
    fam = random_graded(6, stoquastic=True, seed=9)
    grid, h = cut_profile(fam, fam.grading.s_indices, 5)
    for s, hv in zip(grid, h):
        assert hv == pytest.approx(snapshot(fam, s).h, abs=1e-12)


def test_cut_size_limit():
    with pytest.raises(CutSizeError):
        min_cut(transverse_chain(4), max_dim=8)


def test_frustrated_triangle_unbalanced():
    r = balance_and_gamma_tilde(frustrated_triangle().A(0.0))
    assert not r.balanced
    assert r.worst_edge > 0.1


def test_complex_phases_gauge_away():
    z = np.exp(1j * np.array([0.3, -1.2, 2.0]))
    A = np.array([[0, -1, -0.5], [-1, 1, -0.2], [-0.5, -0.2, 2]], dtype=complex)
    B = np.diag(z) @ A @ np.diag(np.conj(z))
    gauge, worst = sign_gauge(B)
    assert worst < 1e-12
    G = np.conj(gauge)[:, None] * B * gauge[None, :]
    off = G - np.diag(np.diag(G))
    assert np.all(off.real <= 1e-12) and np.allclose(off.imag, 0)


def test_positive_bipartite_offdiagonals_are_balanced():
    # even cycle with positive signs: flip alternate sites
    A = np.zeros((4, 4))
    for i in range(4):
        A[i, (i + 1) % 4] = A[(i + 1) % 4, i] = 1.0
    assert balance_and_gamma_tilde(A).balanced


def test_off_diagonal_row_sum():
    A = np.array([[5.0, -1, 2], [-1, 0, 0], [2, 0, -3]])
    assert off_diagonal_row_sum(A) == 3.0


def test_gamma_tilde_formula():
    r = balance_and_gamma_tilde(np.array([[0.0, -1.0], [-1.0, 0.0]]))
    # gamma = 2, Q = 1
    assert r.gamma == pytest.approx(2.0)
    assert r.gamma_tilde == pytest.approx(np.sqrt(2 * 4))


@given(graded_families(sizes=(4, 6, 8), stoquastic=True), st.floats(0, 1))
@settings(max_examples=30)
def test_gamma_tilde_dominates_cheeger_constant(fam, s):
    r = min_cut(fam, [s])
    assert r.balanced
    assert r.gamma_tilde_curve[0] >= r.cheeger_curve[0] - 1e-9


def test_min_cut_deterministic():
    fam = random_graded(8, stoquastic=True, seed=1)
    a, b = min_cut(fam, 5), min_cut(fam, 5)
    assert a.to_json() == b.to_json()
