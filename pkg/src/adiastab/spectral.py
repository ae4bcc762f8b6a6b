"""Static spectral quantities of a graded family at a single ``s``.

Gaps, ground projectors, the Cheeger ratio, the Rayleigh quotient on ``S``,
``kappa``, the projected perturbation, projector derivatives and the
inequality suite relating them.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import DEFAULT_TOL, check_s
from .checks import Check
from .exceptions import DegenerateGroundStateError, GapCollapseError, NonRealCheegerError
from .graded import local_spectra, min_gap
from .linalg import cluster_indices, eigh, op_norm


def ground_state(A, tol=DEFAULT_TOL):
    """Nondegenerate ground vector of ``A``; raises when the ground cluster has rank > 1."""
    es = eigh(A)
    ctol = tol.cluster * (op_norm(A) + 1.0)
    groups = cluster_indices(es.values, ctol)
    if len(groups[0]) > 1:
        raise DegenerateGroundStateError(
            f"ground eigenvalue {es.values[0]:.6g} has multiplicity {len(groups[0])}"
        )
    return es.values[0], es.vectors[:, 0], es


def cheeger_ratio(ground_vec, Delta, grading, tol=DEFAULT_TOL, return_parts=False):
    """Cheeger ratio ``h`` of the grading with respect to a ground vector.

    ``h = -<v, Delta P_S v> / min(<v, P_S v>, <v, P_Sbar v>)``, and ``0`` when
    that minimum mass is below ``tol.supp``.
    """
    v = np.asarray(ground_vec, dtype=complex)
    v = v / np.linalg.norm(v)
    in_s = grading.in_s
    mass_s = float(np.sum(np.abs(v[in_s]) ** 2))
    mass_sbar = float(np.sum(np.abs(v[~in_s]) ** 2))
    w = np.where(in_s, v, 0.0)
    num = -np.vdot(v, Delta @ w)
    scale = max(1.0, op_norm(Delta))
    if abs(num.imag) > tol.h_imag * scale:
        raise NonRealCheegerError(
            f"Cheeger numerator has imaginary part {num.imag:.3e}"
        )
    m = min(mass_s, mass_sbar)
    h = float(num.real) / m if m > tol.supp else 0.0
    if return_parts:
        return h, float(num.real), mass_s, mass_sbar
    return h


@dataclass
class SpectralSnapshot:
    """Everything static at one value of ``s``."""

    s: float
    lambdas: np.ndarray
    eigvecs: np.ndarray
    mu: float
    mu1: float
    mubar: float
    mubar1: float
    h: float
    lambda_S: float
    mass_S: float
    mass_Sbar: float
    P_lambda: np.ndarray
    Pi: np.ndarray
    Pi2: np.ndarray
    P_S: np.ndarray
    P_Sbar: np.ndarray
    P_mu: np.ndarray
    P_mubar: np.ndarray
    R_S: np.ndarray
    R_Sbar: np.ndarray
    H_S: np.ndarray
    H_Sbar: np.ndarray
    Delta: np.ndarray
    A: np.ndarray
    Delta_perp: np.ndarray
    norm_A: float
    support_on_S: bool
    grading: object = field(default=None, repr=False)
    tol: object = field(default=DEFAULT_TOL, repr=False)

    @property
    def lam(self):
        return float(self.lambdas[0])

    @property
    def ground_vec(self):
        return self.eigvecs[:, 0]

    @property
    def gamma(self):
        return float(self.lambdas[1] - self.lambdas[0])

    @property
    def Gamma_S(self):
        return self.mu1 - self.mu

    @property
    def Gamma_Sbar(self):
        return self.mubar1 - self.mubar

    @property
    def min_gap(self):
        return min_gap(self.Gamma_S, self.Gamma_Sbar)

    @property
    def kappa(self):
        return float(self.lambdas[-1] - self.lambdas[0])

    @property
    def norm_Delta(self):
        return op_norm(self.Delta)

    @property
    def c(self):
        return self.norm_Delta / self.min_gap

    @property
    def eta(self):
        return 1.0 - op_norm(self.Delta_perp) / self.min_gap

    @property
    def M(self):
        return self.P_mu + self.P_mubar

    @property
    def M_perp(self):
        return np.eye(len(self.lambdas)) - self.M

    @property
    def H(self):
        return self.H_S + self.H_Sbar

    @property
    def rank_Pi(self):
        return int(round(np.trace(self.Pi).real))

    def scalars(self):
        return {
            "s": self.s,
            "lambda": self.lam,
            "lambda_1": float(self.lambdas[1]),
            "lambda_max": float(self.lambdas[-1]),
            "gamma": self.gamma,
            "mu": self.mu,
            "mu1": self.mu1,
            "mubar": self.mubar,
            "mubar1": self.mubar1,
            "Gamma_S": self.Gamma_S,
            "Gamma_Sbar": self.Gamma_Sbar,
            "h": self.h,
            "lambda_S": self.lambda_S,
            "kappa": self.kappa,
            "c": self.c,
            "eta": self.eta,
            "norm_Delta": self.norm_Delta,
            "norm_Delta_perp": op_norm(self.Delta_perp),
            "mass_S": self.mass_S,
            "mass_Sbar": self.mass_Sbar,
            "rank_P_mu": int(round(np.trace(self.P_mu).real)),
            "rank_P_mubar": int(round(np.trace(self.P_mubar).real)),
            "rank_Pi": self.rank_Pi,
            "support_on_S": self.support_on_S,
        }


def snapshot(fam, s):
    """All static spectral data of ``fam`` at ``s``."""
    s = check_s(s)
    tol = fam.tol
    H_S, H_Sbar, D, A = fam.blocks(s)
    lam, vec, es = ground_state(A, tol)
    g = fam.grading
    h, _, mass_s, mass_sbar = cheeger_ratio(vec, D, g, tol, return_parts=True)
    H = H_S + H_Sbar
    loc_s, loc_sbar = local_spectra(g, H, tol)
    n = fam.dim
    P_S, P_Sbar = g.P_S, g.P_Sbar
    if mass_s > tol.supp:
        w = np.where(g.in_s, vec, 0.0)
        lambda_S = float(np.vdot(w, H_S @ w).real / mass_s)
    else:
        lambda_S = np.nan
    Mp = np.eye(n) - loc_s.P - loc_sbar.P
    D_perp = Mp @ D @ Mp
    D_perp = 0.5 * (D_perp + D_perp.conj().T)

    norm_A = op_norm(A)
    ctol = tol.cluster * (norm_A + 1.0)
    P_lam = np.outer(vec, vec.conj())
    window = es.values <= lam + 2.0 * h + ctol
    Vw = es.vectors[:, window]
    Pi = Vw @ Vw.conj().T
    r = int(round(np.trace(loc_s.P + loc_sbar.P).real))
    Vr = es.vectors[:, :r]
    Pi2 = Vr @ Vr.conj().T

    return SpectralSnapshot(
        s=s,
        lambdas=es.values,
        eigvecs=es.vectors,
        mu=loc_s.mu,
        mu1=loc_s.mu1,
        mubar=loc_sbar.mu,
        mubar1=loc_sbar.mu1,
        h=h,
        lambda_S=lambda_S,
        mass_S=mass_s,
        mass_Sbar=mass_sbar,
        P_lambda=P_lam,
        Pi=Pi,
        Pi2=Pi2,
        P_S=P_S,
        P_Sbar=P_Sbar,
        P_mu=loc_s.P,
        P_mubar=loc_sbar.P,
        R_S=loc_s.R,
        R_Sbar=loc_sbar.R,
        H_S=H_S,
        H_Sbar=H_Sbar,
        Delta=D,
        A=A,
        Delta_perp=D_perp,
        norm_A=norm_A,
        support_on_S=bool(np.sqrt(mass_s) > tol.supp),
        grading=g,
        tol=tol,
    )


# -- projector derivatives --------------------------------------------------------

@dataclass
class ProjectorDerivatives:
    s: float
    Pdot_mu: np.ndarray
    Pdot_mubar: np.ndarray
    Pddot_mu: np.ndarray
    Pddot_mubar: np.ndarray
    Rdot_S: np.ndarray
    Rdot_Sbar: np.ndarray
    mudot: float
    mubardot: float
    cross_norm: float
    cross_norm_fd: float
    norm_Hdot_S: float
    norm_Hdot_Sbar: float
    norm_Hddot_S: float
    rank_mu: int

    def bound_checks(self, snap, tol):
        """Projector-derivative bounds for ``P_mu``.

        The first-derivative bound is checked; both published forms of the
        second-derivative bound are reported, the one with ``||Hddot_S|| / Gamma_S``
        as the checked form.
        """
        g = snap.Gamma_S
        m = self.rank_mu
        rhs1 = self.norm_Hdot_S / g
        rhs2 = np.sqrt(m) * self.norm_Hddot_S / g + 4 * m * self.norm_Hdot_S ** 2 / g ** 2
        rhs2_alt = self.norm_Hddot_S / g ** 2 + 4 * self.norm_Hdot_S / g
        return [
            Check("||Pdot_mu|| <= ||Hdot_S||/Gamma_S", op_norm(self.Pdot_mu), rhs1, tol, s=self.s),
            Check("||Pdot_mubar|| <= ||Hdot_Sbar||/Gamma_Sbar", op_norm(self.Pdot_mubar),
                  self.norm_Hdot_Sbar / snap.Gamma_Sbar, tol, s=self.s),
            Check("||(P_S-P_mu) Pddot_mu P_mu|| <= sqrt(m)||Hddot_S||/Gamma_S + 4m||Hdot_S||^2/Gamma_S^2",
                  self.cross_norm, rhs2, tol, s=self.s),
            Check("||(P_S-P_mu) Pddot_mu P_mu|| <= ||Hddot_S||/Gamma_S^2 + 4||Hdot_S||/Gamma_S [variant]",
                  self.cross_norm, rhs2_alt, tol, applicable=False, s=self.s),
        ]


def _block_derivs(P, R, Hd, Hdd):
    """Analytic first/second derivatives of a ground projector and its reduced resolvent."""
    rank = max(1, int(round(np.trace(P).real)))
    mud = float(np.trace(P @ Hd).real) / rank
    Pd = -(R @ Hd @ P + P @ Hd @ R)
    Rd = -Pd @ R - R @ Hd @ R + mud * (R @ R) - R @ Pd
    Pdd = -(Rd @ Hd @ P + R @ Hdd @ P + R @ Hd @ Pd + Pd @ Hd @ R + P @ Hdd @ R + P @ Hd @ Rd)
    return Pd, Pdd, Rd, mud


def local_derivative_data(snap, der):
    """Projector and resolvent derivatives of both blocks from a snapshot."""
    for gap in (snap.Gamma_S, snap.Gamma_Sbar):
        if gap <= snap.tol.cluster * (snap.norm_A + 1.0):
            raise GapCollapseError(f"local gap {gap:.3e} vanished at s={snap.s}")
    Pd, Pdd, Rd, mud = _block_derivs(snap.P_mu, snap.R_S, der.Hdot_S, der.Hddot_S)
    Pdb, Pddb, Rdb, mudb = _block_derivs(snap.P_mubar, snap.R_Sbar, der.Hdot_Sbar, der.Hddot_Sbar)
    return Pd, Pdd, Rd, mud, Pdb, Pddb, Rdb, mudb


def pdot_mu(fam, s):
    """Analytic ``dP_mu/ds`` at ``s`` (no second derivatives)."""
    snap = snapshot(fam, s)
    der = fam.derivatives(s)
    return -(snap.R_S @ der.Hdot_S @ snap.P_mu + snap.P_mu @ der.Hdot_S @ snap.R_S)


def projector_derivatives(fam, s, fd_step=1e-4):
    """Derivatives of the local ground projectors.

    ``Pdot = -(R Hdot P + P Hdot R)`` with ``R`` the reduced resolvent of the
    block at its ground energy. The cross term ``||(P_S - P_mu) Pddot P_mu||``
    is returned both from the analytic second derivative and from central
    differences of the analytic ``Pdot`` with step ``fd_step``.
    """
    snap = snapshot(fam, s)
    der = fam.derivatives(s)
    Pd, Pdd, Rd, mud, Pdb, Pddb, Rdb, mudb = local_derivative_data(snap, der)
    Q = snap.P_S - snap.P_mu
    cross = op_norm(Q @ Pdd @ snap.P_mu)
    lo, hi = max(0.0, s - fd_step), min(1.0, s + fd_step)
    fd = (pdot_mu(fam, hi) - pdot_mu(fam, lo)) / (hi - lo)
    cross_fd = op_norm(Q @ fd @ snap.P_mu)
    return ProjectorDerivatives(
        s=snap.s,
        Pdot_mu=Pd,
        Pdot_mubar=Pdb,
        Pddot_mu=Pdd,
        Pddot_mubar=Pddb,
        Rdot_S=Rd,
        Rdot_Sbar=Rdb,
        mudot=mud,
        mubardot=mudb,
        cross_norm=cross,
        cross_norm_fd=cross_fd,
        norm_Hdot_S=op_norm(der.Hdot_S),
        norm_Hdot_Sbar=op_norm(der.Hdot_Sbar),
        norm_Hddot_S=op_norm(der.Hddot_S),
        rank_mu=int(round(np.trace(snap.P_mu).real)),
    )


# -- inequality suites --------------------------------------------------------------

def ineq_tol(snap):
    return snap.tol.ineq * (snap.norm_A + 1.0)


def verify_eigenvalue_chain(snap):
    """Signed margins of ``lambda <= min(mu, mubar)``, ``mu <= lambda_S``, ``lambda_S <= lambda + h``."""
    tol = ineq_tol(snap)
    lam = snap.lam
    ok_s = snap.support_on_S
    return [
        Check("lambda <= min(mu, mubar)", lam, min(snap.mu, snap.mubar), tol, s=snap.s),
        Check("mu <= lambda_S", snap.mu, snap.lambda_S, tol, applicable=ok_s, s=snap.s),
        Check("lambda_S <= lambda + h", snap.lambda_S, lam + snap.h, tol, applicable=ok_s, s=snap.s),
    ]


def _sqrt0(x):
    return float(np.sqrt(max(x, 0.0)))


def verify_norm_bounds(snap, assumptions_hold=None):
    """Norm bounds on ``Delta`` against the local ground spaces and on ground-state overlaps.

    When ``assumptions_hold`` is None both structural assumptions are evaluated
    on this snapshot; if they fail every check is marked not applicable.
    """
    tol = ineq_tol(snap)
    h, kappa, g = snap.h, snap.kappa, snap.min_gap
    if assumptions_hold is None:
        a1 = min(snap.mu1, snap.mubar1) > max(snap.mu, snap.mubar)
        limit = 1.0 - h / g if np.isfinite(g) else 1.0
        assumptions_hold = bool(a1 and snap.c <= limit + tol)
    app = bool(assumptions_hold)
    D, M, P_mu, P_mubar = snap.Delta, snap.M, snap.P_mu, snap.P_mubar
    root = _sqrt0(h * kappa) + h
    checks = [
        Check("||M Delta M|| <= h", op_norm(M @ D @ M), h, tol, app, snap.s),
        Check("||Delta P_mu|| <= sqrt(h kappa) + h", op_norm(D @ P_mu), root, tol, app, snap.s),
        Check("||Delta P_mubar|| <= sqrt(h kappa) + h", op_norm(D @ P_mubar), root, tol, app, snap.s),
        Check("||Delta M|| <= sqrt(h kappa) + h", op_norm(D @ M), root, tol, app, snap.s),
    ]
    P_lam = snap.P_lambda
    denom = op_norm(P_lam @ snap.P_S)
    ratio = op_norm(P_lam @ (snap.P_S - P_mu)) / denom if denom > 0 else np.nan
    proj_ok = app and denom > snap.tol.supp
    gs = snap.Gamma_S
    checks += [
        Check("||P_lam P_mu^perp|| / ||P_lam P_S|| <= sqrt((lambda_S - mu)/Gamma_S)",
              ratio, _sqrt0((snap.lambda_S - snap.mu) / gs), tol, proj_ok, snap.s),
        Check("||P_lam P_mu^perp|| / ||P_lam P_S|| <= sqrt(h/Gamma_S)",
              ratio, _sqrt0(h / gs), tol, proj_ok, snap.s),
        Check("||P_lam M^perp|| <= sqrt(2h/min Gamma)",
              op_norm(P_lam @ snap.M_perp), _sqrt0(2 * h / g), tol, app, snap.s),
    ]
    one_minus_c = 1.0 - snap.c
    pi_rhs = _sqrt0(2 * h / (one_minus_c * g)) if one_minus_c > 0 else np.inf
    n = len(snap.lambdas)
    checks.append(
        Check("||Pi^perp M|| <= sqrt(2h/((1-c) min Gamma))",
              op_norm((np.eye(n) - snap.Pi2) @ M), pi_rhs, tol, app and one_minus_c > 0, snap.s)
    )
    return checks
