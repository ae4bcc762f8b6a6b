import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adiastab.exceptions import GradingError, StructureError
from adiastab.generators import double_well, random_graded, rotating_block, transverse_chain
from adiastab.graded import (
    ConjugatedSchedule,
    GradedFamily,
    Grading,
    LinearSchedule,
    PolynomialSchedule,
    SplineSchedule,
    check_assumptions,
    constant_schedule,
    family_from_json,
    local_spectra,
    schedule_from_json,
    unitary_rotation_generator,
)
from adiastab.linalg import op_norm
from conftest import hermitian, graded_families


@pytest.mark.parametrize("dim, idx", [(1, [0]), (3, []), (3, [0, 1, 2]), (3, [3]), (3, [-1])])
def test_grading_rejects_degenerate_splits(dim, idx):
    with pytest.raises(GradingError):
        Grading(dim, idx)


def test_grading_masks():
    g = Grading(4, [2, 0, 0])
    assert g.s_indices == (0, 2)
    assert g.sbar_indices == (1, 3)
    assert np.array_equal(g.P_S + g.P_Sbar, np.eye(4))
    assert g.diag_mask[0, 2] and not g.diag_mask[0, 1]
    assert np.array_equal(g.diag_mask, ~g.offdiag_mask)
    assert g.complement() == Grading(4, [1, 3])


def test_structure_error_on_offdiagonal_H():
    g = Grading(2, [0])
    H = constant_schedule(np.array([[0.0, 0.3], [0.3, 1.0]]))
    D = constant_schedule(np.zeros((2, 2)))
    with pytest.raises(StructureError):
        GradedFamily(g, H, D)


def test_structure_error_on_diagonal_delta():
    g = Grading(2, [0])
    H = constant_schedule(np.diag([0.0, 1.0]))
    D = constant_schedule(np.diag([0.1, 0.0]))
    with pytest.raises(StructureError):
        GradedFamily(g, H, D)


def test_dimension_mismatch():
    with pytest.raises(GradingError):
        GradedFamily(Grading(3, [0]), constant_schedule(np.eye(2)), constant_schedule(np.zeros((2, 2))))


@given(graded_families(), st.floats(0, 1))
def test_blocks_sum_to_A(fam, s):
    b = fam.blocks(s)
    assert np.allclose(b.H_S + b.H_Sbar + b.Delta, b.A, atol=0)
    g = fam.grading
    assert op_norm(g.P_S @ b.H_S @ g.P_Sbar) == 0
    assert op_norm(g.P_S @ b.Delta @ g.P_S) == 0


@given(graded_families(sizes=(4, 6)), st.floats(0.05, 0.95))
def test_derivatives_match_finite_differences(fam, s):
    d = fam.derivatives(s)
    e = 1e-5
    fd1 = (fam.A(s + e) - fam.A(s - e)) / (2 * e)
    assert op_norm(fam.A_dot(s) - fd1) < 1e-7 * (1 + op_norm(fd1))
    assert np.allclose(d.Hdot_S + d.Hdot_Sbar, d.Hdot, atol=0)


def test_conjugated_schedule_derivatives(rng):
    H0 = np.diag([0.0, 1.0, 0.3, 1.4]).astype(complex)
    sched = ConjugatedSchedule(H0, unitary_rotation_generator(4, 0, 1), 0.7)
    e = 1e-4
    for s in (0.1, 0.5, 0.9):
        fd1 = (sched.value(s + e) - sched.value(s - e)) / (2 * e)
        fd2 = (sched.value(s + e) - 2 * sched.value(s) + sched.value(s - e)) / e ** 2
        assert op_norm(sched.d1(s) - fd1) < 1e-7
        assert op_norm(sched.d2(s) - fd2) < 1e-5
        # conjugation preserves the spectrum
        assert np.allclose(np.linalg.eigvalsh(sched.value(s)), [0, 0.3, 1, 1.4], atol=1e-12)


def test_polynomial_schedule_derivatives(rng):
    C = [hermitian(rng, 3) for _ in range(4)]
    p = PolynomialSchedule(C)
    s = 0.37
    assert np.allclose(p.value(s), C[0] + s * C[1] + s ** 2 * C[2] + s ** 3 * C[3])
    assert np.allclose(p.d1(s), C[1] + 2 * s * C[2] + 3 * s ** 2 * C[3])
    assert np.allclose(p.d2(s), 2 * C[2] + 6 * s * C[3])


def test_spline_schedule_interpolates_knots(rng):
    knots = [0.0, 0.3, 0.7, 1.0]
    mats = [hermitian(rng, 3) for _ in knots]
    sp = SplineSchedule(knots, mats)
    for k, M in zip(knots, mats):
        assert np.allclose(sp.value(k), M, atol=1e-12)
    e = 1e-5
    fd = (sp.value(0.5 + e) - sp.value(0.5 - e)) / (2 * e)
    assert op_norm(sp.d1(0.5) - fd) < 1e-6


@pytest.mark.parametrize("make", [
    lambda: double_well(0.05),
    lambda: rotating_block(),
    lambda: random_graded(6, seed=3),
    lambda: transverse_chain(3),
])
def test_family_json_round_trip(make):
    fam = make()
    text = json.dumps(fam.to_json())
    back = family_from_json(json.loads(text))
    assert back.grading == fam.grading
    for s in (0.0, 0.4, 1.0):
        assert op_norm(back.A(s) - fam.A(s)) < 1e-12
        assert op_norm(back.A_dot(s) - fam.A_dot(s)) < 1e-12


def _wire(rows):
    return {"dim": len(rows), "entries": [[[float(x), 0.0] for x in r] for r in rows]}


def test_linear_interpolation_wire_format():
    obj = {
        "grading": [0],
        "schedule": {
            "kind": "linear-interpolation",
            "H0": _wire([[0, 0], [0, 1]]), "H1": _wire([[0, 0], [0, 2]]),
            "D0": _wire([[0, -0.1], [-0.1, 0]]), "D1": _wire([[0, -0.2], [-0.2, 0]]),
        },
    }
    fam = family_from_json(obj)
    assert np.allclose(fam.A(0.5), [[0, -0.15], [-0.15, 1.5]])


def test_family_from_json_missing_key():
    with pytest.raises(KeyError):
        family_from_json({"schedule": {}})


def test_schedule_json_round_trip(rng):
    s = LinearSchedule(hermitian(rng, 3), hermitian(rng, 3))
    back = schedule_from_json(json.loads(json.dumps(s.to_json())))
    assert np.allclose(back.value(0.3), s.value(0.3))


@given(graded_families())
@settings(max_examples=20)
def test_regrade_preserves_total(fam):
    g2 = fam.regrade([0, fam.dim - 1])
    for s in (0.0, 0.5, 1.0):
        assert op_norm(g2.A(s) - fam.A(s)) < 1e-14


def test_local_spectra_double_well(dw):
    H = dw.blocks(0.3).H
    ls, lsb = local_spectra(dw, H)
    assert ls.mu == pytest.approx(0.0)
    assert ls.gap == pytest.approx(1.0)
    assert lsb.mu == pytest.approx(0.2)
    assert lsb.gap == pytest.approx(1.0)
    assert ls.rank == lsb.rank == 1


def test_one_dimensional_block_has_infinite_gap():
    g = Grading(3, [0])
    fam = GradedFamily(g, constant_schedule(np.diag([0.0, 1.0, 2.0])), constant_schedule(np.zeros((3, 3))))
    ls, lsb = local_spectra(fam, fam.blocks(0).H)
    assert ls.one_dimensional and not np.isfinite(ls.gap)
    assert lsb.gap == pytest.approx(1.0)


def test_assumptions_hold_on_double_well(dw):
    rep = check_assumptions(dw, np.linspace(0, 1, 9))
    assert rep.holds
    assert np.all(rep.c < rep.c_limit)


def test_assumption2_fails_for_strong_coupling():
    fam = double_well(0.9)
    rep = check_assumptions(fam, np.linspace(0, 1, 5))
    assert not rep.holds
