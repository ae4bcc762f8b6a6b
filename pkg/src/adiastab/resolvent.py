"""Reduced resolvents of the shifted block Hamiltonian and the operator ``F``.

``H' = H + (mu - mubar) P_Sbar`` moves the ground energy of the ``Sbar`` block
onto ``mu``. ``R`` inverts ``H' - mu`` away from the two local ground spaces,
``R_perp`` does the same for ``H' + Delta_perp - mu``, and ``L = I + R Delta_perp``
links them via ``R_perp = L^{-1} R``.
"""

from dataclasses import dataclass

import numpy as np

from .checks import Check
from .exceptions import ClusterCollisionError, GapCollapseError, PerturbationTooLargeError
from .graded import local_spectra
from .linalg import commutator, eigh, op_norm
from .spectral import ineq_tol, local_derivative_data, snapshot


def h_prime(fam, s, snap=None):
    """``H + (mu - mubar) P_Sbar``."""
    snap = snapshot(fam, s) if snap is None else snap
    return snap.H + (snap.mu - snap.mubar) * snap.P_Sbar


def _restricted_inverse(G, Mperp, mu, tol):
    """``(G - mu)`` inverted on ``range(Mperp)`` and extended by zero.

    ``Mperp`` must be an orthogonal projector commuting with ``G`` (checked
    by the caller); its range is spanned via an eigendecomposition.
    """
    w, V = np.linalg.eigh(Mperp)
    Q = V[:, w > 0.5]
    n = G.shape[0]
    if Q.shape[1] == 0:
        return np.zeros((n, n), dtype=complex)
    K = Q.conj().T @ (G - mu * np.eye(n)) @ Q
    K = 0.5 * (K + K.conj().T)
    kw, kv = np.linalg.eigh(K)
    if np.min(np.abs(kw)) <= tol:
        raise ClusterCollisionError(
            f"operator has an eigenvalue within {tol:.2e} of mu outside the local ground spaces"
        )
    W = Q @ kv
    return (W / kw) @ W.conj().T


@dataclass
class ResolventBundle:
    s: float
    Hprime: np.ndarray
    R: np.ndarray
    R_perp: np.ndarray
    L: np.ndarray
    L_inv: np.ndarray
    F: np.ndarray
    Fdot_Pmu: np.ndarray
    A_terms: tuple
    eta: float
    mu: float
    Delta_perp: np.ndarray
    Delta_perp_dot: np.ndarray
    R_dot: np.ndarray
    Hprime_dot: np.ndarray
    Pdot_mu: np.ndarray
    Pdot_mubar: np.ndarray
    Pddot_mu: np.ndarray
    snap: object
    norms: dict

    @property
    def P_mu(self):
        return self.snap.P_mu

    @property
    def M_perp(self):
        return self.snap.M_perp

    @property
    def scale(self):
        """Magnitude used to make identity residuals relative."""
        return (op_norm(self.Hprime) + abs(self.mu) + op_norm(self.Delta_perp) + 1.0) * (
            op_norm(self.R) + op_norm(self.R_perp) + 1.0
        )


def build_bundle(fam, s, snap=None):
    """All resolvent-calculus operators at ``s``.

    Raises GapCollapseError when a local gap vanishes, PerturbationTooLargeError
    when ``||Delta_perp||`` reaches the smaller local gap (``eta <= 0``) and
    ClusterCollisionError when ``H' - mu`` has an accidental zero mode outside
    the local ground spaces.
    """
    snap = snapshot(fam, s) if snap is None else snap
    tol = snap.tol
    der = fam.derivatives(snap.s)
    g = snap.min_gap
    ctol = tol.cluster * (snap.norm_A + 1.0)
    if g <= ctol:
        raise GapCollapseError(f"min local gap {g:.3e} vanished at s={snap.s}")
    Dp = snap.Delta_perp
    eta = 1.0 - op_norm(Dp) / g if np.isfinite(g) else 1.0
    if eta <= 0:
        raise PerturbationTooLargeError(
            f"||Delta_perp|| = {op_norm(Dp):.4g} >= min local gap {g:.4g} (eta = {eta:.3g})"
        )

    n = len(snap.lambdas)
    I = np.eye(n)
    mu = snap.mu
    Hp = snap.H + (mu - snap.mubar) * snap.P_Sbar
    Mp = snap.M_perp

    # R spectrally from H'; the mu-cluster must be exactly range(M)
    es = eigh(Hp)
    zero = np.abs(es.values - mu) <= ctol
    rank_M = int(round(np.trace(snap.M).real))
    if int(zero.sum()) != rank_M:
        raise ClusterCollisionError(
            f"ker(H' - mu) has dimension {int(zero.sum())}, local ground spaces have {rank_M}"
        )
    V = es.vectors[:, ~zero]
    R = (V / (es.values[~zero] - mu)) @ V.conj().T
    R = R @ Mp
    R_perp = _restricted_inverse(Hp + Dp, Mp, mu, ctol)
    L = I + R @ Dp
    L_inv = np.linalg.solve(L, I)

    Pd, Pdd, _, mud, Pdb, _, _, mubd = local_derivative_data(snap, der)
    Hp_dot = der.Hdot + (mud - mubd) * snap.P_Sbar
    Md = Pd + Pdb
    R_dot = -Md @ R - R @ (Hp_dot - mud * I) @ R - R @ Md
    D_perp_dot = -Md @ snap.Delta @ Mp + Mp @ der.Ddot @ Mp - Mp @ snap.Delta @ Md

    P = snap.P_mu
    X = R_perp @ Pd @ P
    F = X + X.conj().T
    LR = L_inv @ R
    A0 = -L_inv @ (R_dot @ Dp + R @ D_perp_dot) @ LR @ Pd @ P
    A1 = L_inv @ R_dot @ Pd @ P
    A2 = L_inv @ R @ Pdd @ P
    A3 = -P @ Pd @ LR @ Pd
    Fdot_P = A0 + A1 + A2 + A3

    Hd_Sbar_p = Hp_dot - der.Hdot_S
    norms = {
        "Hdot_S": op_norm(der.Hdot_S),
        "Hdot_Sbar": op_norm(der.Hdot_Sbar),
        "Hddot_S": op_norm(der.Hddot_S),
        "Hprime_dot_Sbar": op_norm(Hd_Sbar_p),
        "Delta_perp": op_norm(Dp),
        "Delta_perp_dot": op_norm(D_perp_dot),
        "mudot": mud,
        "mubardot": mubd,
    }
    return ResolventBundle(
        s=snap.s,
        Hprime=Hp,
        R=R,
        R_perp=R_perp,
        L=L,
        L_inv=L_inv,
        F=F,
        Fdot_Pmu=Fdot_P,
        A_terms=(A0, A1, A2, A3),
        eta=float(eta),
        mu=mu,
        Delta_perp=Dp,
        Delta_perp_dot=D_perp_dot,
        R_dot=R_dot,
        Hprime_dot=Hp_dot,
        Pdot_mu=Pd,
        Pdot_mubar=Pdb,
        Pddot_mu=Pdd,
        snap=snap,
        norms=norms,
    )


def r_dot(fam, s):
    """Analytic ``dR/ds``."""
    return build_bundle(fam, s).R_dot


def f_operator(bundle, Pdot_mu=None):
    """``(F, Fdot P_mu)``; ``Pdot_mu`` defaults to the bundle's own."""
    if Pdot_mu is None:
        return bundle.F, bundle.Fdot_Pmu
    P = bundle.P_mu
    X = bundle.R_perp @ Pdot_mu @ P
    return X + X.conj().T, bundle.Fdot_Pmu


# -- identity residuals -------------------------------------------------------------

def identity_residuals(bundle):
    """Residuals of every exact identity satisfied by the bundle, unscaled."""
    b = bundle
    n = b.R.shape[0]
    I = np.eye(n)
    Mp = b.M_perp
    G = b.Hprime - b.mu * I
    Gp = G + b.Delta_perp
    P = b.P_mu
    LR = b.L_inv @ b.R
    F_alt = LR @ b.Pdot_mu @ P + P @ b.Pdot_mu @ LR
    return {
        "(H'-mu)R - Mperp": op_norm(G @ b.R - Mp),
        "R(H'-mu) - Mperp": op_norm(b.R @ G - Mp),
        "R M": op_norm(b.R @ b.snap.M),
        "(H'+Dperp-mu)R_perp - Mperp": op_norm(Gp @ b.R_perp - Mp),
        "R_perp - L^-1 R": op_norm(b.R_perp - LR),
        "R - R_perp - R Dperp R_perp": op_norm(b.R - b.R_perp - b.R @ b.Delta_perp @ b.R_perp),
        "R - R_perp - R_perp Dperp R": op_norm(b.R - b.R_perp - b.R_perp @ b.Delta_perp @ b.R),
        "F - (L^-1 R Pdot P + P Pdot L^-1 R)": op_norm(b.F - F_alt),
        "P_mu Dperp": op_norm(P @ b.Delta_perp),
        "[H'+Dperp, F] - [Pdot, P]": verify_commutator(b),
    }


def verify_commutator(bundle, F=None):
    """``||[H' + Delta_perp, F] - [Pdot_mu, P_mu]||``."""
    F = bundle.F if F is None else F
    lhs = commutator(bundle.Hprime + bundle.Delta_perp, F)
    rhs = commutator(bundle.Pdot_mu, bundle.P_mu)
    return op_norm(lhs - rhs)


def hprime_checks(bundle):
    """``H'`` leaves the local ground data intact and shifts by at most ``h``."""
    snap = bundle.snap
    tol = ineq_tol(snap)
    Hp = bundle.Hprime
    Ps, Psb = snap.P_S, snap.P_Sbar
    loc_s, loc_sb = local_spectra(snap.grading, Hp, snap.tol)
    # needs ground-state mass on both sides; with h = 0 the levels are unrelated
    both = min(snap.mass_S, snap.mass_Sbar) > snap.tol.supp
    a1 = min(snap.mu1, snap.mubar1) > max(snap.mu, snap.mubar)
    return [
        Check("|mu - mubar| <= h", abs(snap.mu - snap.mubar), snap.h, tol, bool(both and a1), snap.s),
        Check("lowest Sbar eigenvalue of H' == mu", abs(loc_sb.mu - snap.mu), 0.0, tol, s=snap.s),
        Check("P_mu unchanged by H'", op_norm(loc_s.P - snap.P_mu), 0.0, tol, s=snap.s),
        Check("P_mubar unchanged by H'", op_norm(loc_sb.P - snap.P_mubar), 0.0, tol, s=snap.s),
        Check("H_S unchanged by H'", op_norm(Ps @ Hp @ Ps - snap.H_S), 0.0, tol, s=snap.s),
        Check("H' block diagonal", op_norm(Ps @ Hp @ Psb), 0.0, tol, s=snap.s),
    ]


# -- bounds -------------------------------------------------------------------------

def _m_rank(b):
    return max(1, int(round(np.trace(b.P_mu).real)))


def fdot_bound(b, hbar_prime=False):
    """Right side of the ``||Fdot P_mu||`` bound.

    With ``hbar_prime=True`` the exact ``||Hdot'_Sbar||`` replaces the
    ``2||Hdot_Sbar|| + ||Hdot_S||`` estimate.
    """
    snap = b.snap
    nm = b.norms
    gs, gsb, g = snap.Gamma_S, snap.Gamma_Sbar, snap.min_gap
    hs = nm["Hdot_S"]
    sbar = nm["Hprime_dot_Sbar"] if hbar_prime else 2 * nm["Hdot_Sbar"] + hs
    mx = max(hs / gs ** 2, sbar / gsb ** 2 if np.isfinite(gsb) else 0.0)
    d_term = nm["Delta_perp_dot"] / g if np.isfinite(g) else 0.0
    inner = (1 / b.eta) * (hs / gs ** 2) * (d_term + 4 * nm["Delta_perp"] * mx)
    return (1 / b.eta) * (inner + 9 * hs ** 2 / gs ** 3 + nm["Hddot_S"] / gs ** 2)


def a_term_bounds(b):
    """Bounds on the four pieces of ``Fdot P_mu``, with ``||Hdot'_Sbar||`` exact."""
    snap = b.snap
    nm = b.norms
    gs, gsb, g = snap.Gamma_S, snap.Gamma_Sbar, snap.min_gap
    hs = nm["Hdot_S"]
    m = _m_rank(b)
    mx = max(hs / gs ** 2, nm["Hprime_dot_Sbar"] / gsb ** 2 if np.isfinite(gsb) else 0.0)
    d_term = nm["Delta_perp_dot"] / g if np.isfinite(g) else 0.0
    e = 1 / b.eta
    return (
        e * e * (hs / gs ** 2) * (d_term + 4 * nm["Delta_perp"] * mx),
        4 * e * hs ** 2 / gs ** 3,
        e * (np.sqrt(m) * nm["Hddot_S"] / gs ** 2 + 4 * m * hs ** 2 / gs ** 3),
        e * hs ** 2 / gs ** 3,
    )


def verify_f_bounds(bundle, fam=None, s=None):
    """Norm bounds on ``R``, ``Rdot``, ``L^{-1}``, ``F`` and ``Fdot P_mu``."""
    b = bundle
    snap = b.snap
    tol = ineq_tol(snap) * max(1.0, op_norm(b.R) + op_norm(b.R_dot) + op_norm(b.L_inv))
    nm = b.norms
    gs, gsb, g = snap.Gamma_S, snap.Gamma_Sbar, snap.min_gap
    P = b.P_mu
    hs = nm["Hdot_S"]
    rd_s = hs / gs ** 2
    rd_sb = nm["Hprime_dot_Sbar"] / gsb ** 2 if np.isfinite(gsb) else 0.0
    f_rhs = (1 / b.eta) * hs / gs ** 2
    out = [
        Check("||R|| <= 1/min Gamma", op_norm(b.R), 1 / g, tol, s=b.s),
        Check("||Rdot|| <= 4 max(||Hdot_S||/Gamma_S^2, ||Hdot'_Sbar||/Gamma_Sbar^2)",
              op_norm(b.R_dot), 4 * max(rd_s, rd_sb), tol, s=b.s),
        Check("||Rdot P_S|| <= 4||Hdot_S||/Gamma_S^2", op_norm(b.R_dot @ snap.P_S), 4 * rd_s, tol, s=b.s),
        Check("||Rdot P_Sbar|| <= 4||Hdot'_Sbar||/Gamma_Sbar^2",
              op_norm(b.R_dot @ snap.P_Sbar), 4 * rd_sb, tol, s=b.s),
        Check("||L^-1|| <= 1/eta", op_norm(b.L_inv), 1 / b.eta, tol, s=b.s),
        Check("||F P_mu|| <= ||Hdot_S||/(eta Gamma_S^2)", op_norm(b.F @ P), f_rhs, tol, s=b.s),
        Check("||F (P_S - P_mu)|| <= ||Hdot_S||/(eta Gamma_S^2)",
              op_norm(b.F @ (snap.P_S - P)), f_rhs, tol, s=b.s),
        Check("||Fdot P_mu|| <= F-derivative bound", op_norm(b.Fdot_Pmu), fdot_bound(b), tol, s=b.s),
    ]
    for k, (A, rhs) in enumerate(zip(b.A_terms, a_term_bounds(b))):
        out.append(Check(f"||A_{k}|| <= term bound", op_norm(A), rhs, tol, s=b.s))
    return out


# -- finite-difference cross-checks ---------------------------------------------------

def _fd5(f, s, step):
    """Five-point central difference, falling back to one-sided near the ends."""
    if step <= s <= 1 - step and 2 * step <= s <= 1 - 2 * step:
        return (-f(s + 2 * step) + 8 * f(s + step) - 8 * f(s - step) + f(s - 2 * step)) / (12 * step)
    if s < 0.5:
        return (-3 * f(s) + 4 * f(s + step) - f(s + 2 * step)) / (2 * step)
    return (3 * f(s) - 4 * f(s - step) + f(s - 2 * step)) / (2 * step)


def r_dot_fd_residual(fam, s, step=1e-5):
    """``||Rdot_analytic - Rdot_fd||`` and the scale ``max(1, ||Rdot||)``."""
    b = build_bundle(fam, s)
    fd = _fd5(lambda x: build_bundle(fam, x).R, s, step)
    return op_norm(b.R_dot - fd), max(1.0, op_norm(b.R_dot))


def fdot_fd_residual(fam, s, step=1e-5):
    """Analytic ``Fdot P_mu`` against ``d(F P_mu)/ds - F Pdot_mu`` by finite differences."""
    b = build_bundle(fam, s)

    def FP(x):
        bx = build_bundle(fam, x)
        return bx.F @ bx.P_mu

    fd = _fd5(FP, s, step) - b.F @ b.Pdot_mu
    return op_norm(b.Fdot_Pmu - fd), max(1.0, op_norm(b.Fdot_Pmu))
