import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from adiastab.bounds import rhs_all
from adiastab.estimators import AdiabaticBoundEstimator, CheegerCut, SpectralProfile
from adiastab.generators import random_graded
from adiastab.spectral import snapshot


def test_spectral_profile(dw):
    sp = SpectralProfile(n_points=11).fit(dw)
    X = sp.transform()
    names = list(sp.get_feature_names_out())
    assert X.shape == (11, len(names))
    h = X[:, names.index("h")]
    assert np.all(h > 0)
    assert h[3] == pytest.approx(snapshot(dw, 0.3).h)


def test_spectral_profile_not_fitted():
    with pytest.raises(NotFittedError):
        SpectralProfile().transform()


def test_bound_estimator_matches_report(rot):
    est = AdiabaticBoundEstimator(n_points=33).fit(rot)
    rep = rhs_all(rot, 50.0, bounds_only=True, n_report=33)
    assert est.predict([50.0])[0] == pytest.approx(rep.rhs["main"], rel=1e-14)
    terms = est.predict_terms([50.0])[0]
    assert terms[1] == pytest.approx(rep.rhs["tunnel"], rel=1e-14)
    assert est.T_star_ == pytest.approx(rep.crossover_T_star)
    assert est.C_ == pytest.approx(rep.C)


def test_bound_estimator_static(dw_const):
    est = AdiabaticBoundEstimator(n_points=9).fit(dw_const)
    h0 = snapshot(dw_const, 0.0).h
    assert est.predict_static([4.0])[0] == pytest.approx(2 * np.sqrt(4 * h0))


def test_bound_estimator_params_round_trip():
    est = AdiabaticBoundEstimator(n_points=17, eps_T=0.01)
    assert clone(est).get_params() == est.get_params()
    with pytest.raises(NotFittedError):
        est.predict([1.0])


def test_bound_estimator_score(dw):
    rep = AdiabaticBoundEstimator(n_points=17).fit(dw).score(10.0)
    assert rep.passed


def test_cheeger_cut_search_and_transform():
    fam = random_graded(6, stoquastic=True, seed=3)
    cc = CheegerCut(n_points=5).fit(fam)
    assert cc.h_min_ == pytest.approx(np.max(cc.h_curve_))
    g = cc.transform(fam)
    assert g.grading.s_indices == cc.cut_


def test_cheeger_cut_explicit(dw):
    cc = CheegerCut(n_points=5, cut=[0, 1]).fit(dw)
    assert cc.cut_ == (0, 1)
    assert cc.result_ is None
    assert np.allclose(cc.h_curve_, [snapshot(dw, s).h for s in cc.s_])
