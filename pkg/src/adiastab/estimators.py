"""Estimator-style wrappers: fit on a graded family, then query at total times ``T``."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .bounds import (
    compose_rhs,
    constants_B_C,
    crossover_T,
    crossover_T_golden,
    rhs_all,
    rhs_static,
    sweep_constants,
)
from .propagators import N_REPORT, grid_snapshots
from .stoquastic import cut_profile, min_cut


class SpectralProfile(BaseEstimator):
    """Snapshot scalars of a family on an ``s`` grid.

    After ``fit``: ``s_``, ``table_`` (dict of arrays) and ``snapshots_``.
    """

    def __init__(self, n_points=N_REPORT, keep_snapshots=False):
        self.n_points = n_points
        self.keep_snapshots = keep_snapshots

    def fit(self, fam, y=None):
        self.s_ = np.linspace(0.0, 1.0, int(self.n_points))
        snaps = grid_snapshots(fam, self.s_)
        rows = [sn.scalars() for sn in snaps]
        self.table_ = {k: np.array([r[k] for r in rows]) for k in rows[0]}
        self.snapshots_ = snaps if self.keep_snapshots else None
        return self

    def transform(self, fam=None):
        check_is_fitted(self, "table_")
        keys = sorted(self.table_)
        return np.column_stack([self.table_[k].astype(float) for k in keys])

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "table_")
        return np.array(sorted(self.table_), dtype=object)


class AdiabaticBoundEstimator(BaseEstimator):
    """Theorem constants from one sweep; ``predict(T)`` gives ``rhs_main`` without propagation.

    ``eps_T`` is fixed at construction (0 by default, the bounds-only
    convention). ``score(T)`` runs the full comparison for one ``T`` and
    returns the ``BoundReport``.
    """

    def __init__(self, n_points=N_REPORT, eps_T=0.0, tol_step=None, q_matrix="full"):
        self.n_points = n_points
        self.eps_T = eps_T
        self.tol_step = tol_step
        self.q_matrix = q_matrix

    def fit(self, fam, y=None):
        self.family_ = fam
        self.constants_ = sweep_constants(fam, int(self.n_points))
        self.bound_constants_ = constants_B_C(self.constants_, self.eps_T)
        bc = self.bound_constants_
        self.B_, self.C_, self.eta_, self.c_ = bc.B, bc.C, bc.eta, bc.c
        self.T_star_ = crossover_T(bc.hB, bc.C_s, bc.eta_s)
        self.T_star_golden_ = crossover_T_golden(bc.hB, bc.C_s, bc.eta_s, self.T_star_)
        return self

    def _rhs(self, T):
        bc = self.bound_constants_
        return np.array([compose_rhs(bc.hB, bc.C_s, bc.eta_s, float(t)) for t in np.atleast_1d(T)])

    def predict(self, T):
        """``rhs_main`` at each total time."""
        check_is_fitted(self, "bound_constants_")
        return self._rhs(T)[:, 0]

    def predict_terms(self, T):
        """Columns ``(rhs_main, rhs_tunnel, rhs_adiab)``."""
        check_is_fitted(self, "bound_constants_")
        return self._rhs(T)

    def predict_static(self, T):
        check_is_fitted(self, "constants_")
        h0 = float(self.constants_["h"][0])
        return np.array([rhs_static(h0, float(t)) for t in np.atleast_1d(T)])

    def score(self, T, y=None):
        check_is_fitted(self, "family_")
        return rhs_all(self.family_, T, tol_step=self.tol_step, n_report=int(self.n_points),
                       q_matrix=self.q_matrix)


class CheegerCut(BaseEstimator):
    """Exhaustive min-cut search; ``cut_`` and ``h_min_`` after ``fit``."""

    def __init__(self, n_points=17, max_dim=16, cut=None):
        self.n_points = n_points
        self.max_dim = max_dim
        self.cut = cut

    def fit(self, fam, y=None):
        if self.cut is not None:
            self.s_, self.h_curve_ = cut_profile(fam, self.cut, int(self.n_points))
            self.cut_ = tuple(sorted(self.cut))
            self.h_min_ = float(np.max(self.h_curve_))
            self.result_ = None
            return self
        r = min_cut(fam, int(self.n_points), max_dim=self.max_dim)
        self.result_ = r
        self.s_, self.h_curve_ = r.s_grid, r.h_curve
        self.cut_ = r.best_cut
        self.h_min_ = r.h_min
        return self

    def transform(self, fam):
        """The family regraded along the fitted cut."""
        check_is_fitted(self, "cut_")
        return fam.regrade(self.cut_)


__all__ = ["AdiabaticBoundEstimator", "CheegerCut", "SpectralProfile"]
