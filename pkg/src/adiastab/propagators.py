"""Time-dependent Schrodinger propagators on ``s in [0, 1]`` and the quantities built from them.

All requested propagators advance together on one adaptive mesh. One step
is the midpoint exponential ``U <- exp(-i d G(s + d/2)) U``. The local error is
estimated by comparing one full step with two half steps. Accepted steps keep
the Richardson-extrapolated value, which is re-unitarized by polar projection
when it drifts. State is recorded on a fixed reporting grid.
"""

import os
from dataclasses import dataclass, field

import numpy as np

from .exceptions import StepBudgetError
from .graded import local_spectra
from .linalg import op_norm, polar_unitary, unitarity_defect
from .spectral import snapshot

NAMES = ("U", "U_perp", "U_perp_prime", "V", "V_ad")
ALL_NAMES = NAMES + ("V_ad_prime",)
DEFAULT_MAX_STEPS = 2_000_000
N_REPORT = 257
STEP_NORM_CAP = 0.1


def max_steps_default():
    raw = os.environ.get("ADIASTAB_MAX_STEPS")
    return int(raw) if raw else DEFAULT_MAX_STEPS


def generators(fam, s, T, which=NAMES):
    """T-scaled Hermitian generators of the requested propagators at ``s``.

    ``U``: ``T(H + Delta)``; ``U_perp``: ``T(H + Delta_perp)``; ``U_perp_prime``:
    ``T(H' + Delta_perp)``; ``V``: ``T H``; ``V_ad``: ``T H + i[Pdot_mu, P_mu]``;
    ``V_ad_prime``: ``T H' + i[Pdot_mu, P_mu]``.
    """
    H_S, H_Sbar, D, A = fam.blocks(s)
    H = H_S + H_Sbar
    out = {}
    if "U" in which:
        out["U"] = T * A
    if "V" in which:
        out["V"] = T * H
    rest = set(which) - {"U", "V"}
    if not rest:
        return out
    loc, locb = local_spectra(fam, H, fam.tol)
    Mp = np.eye(fam.dim) - loc.P - locb.P
    Dp = Mp @ D @ Mp
    Hp = H + (loc.mu - locb.mu) * fam.grading.P_Sbar
    if "U_perp" in which:
        out["U_perp"] = T * (H + Dp)
    if "U_perp_prime" in which:
        out["U_perp_prime"] = T * (Hp + Dp)
    if rest & {"V_ad", "V_ad_prime"}:
        Hd_S = fam.derivatives(s).Hdot_S
        Pd = -(loc.R @ Hd_S @ loc.P + loc.P @ Hd_S @ loc.R)
        K = 1j * (Pd @ loc.P - loc.P @ Pd)
        if "V_ad" in which:
            out["V_ad"] = T * H + K
        if "V_ad_prime" in which:
            out["V_ad_prime"] = T * Hp + K
    return {k: 0.5 * (v + v.conj().T) for k, v in out.items()}


def _expm(G, d):
    w, V = np.linalg.eigh(G)
    return (V * np.exp(-1j * d * w)) @ V.conj().T, float(np.max(np.abs(w)))


@dataclass
class PropagatorSet:
    """Propagators sampled on the reporting grid."""

    T: float
    s_grid: np.ndarray
    unitaries: dict
    step_error_estimate: float
    errors: dict
    n_steps: int
    n_rejected: int
    tol_step: float
    max_unitarity_defect: float = 0.0
    extra: dict = field(default_factory=dict)

    def __getitem__(self, name):
        return self.unitaries[name]

    def __contains__(self, name):
        return name in self.unitaries

    def final(self, name):
        return self.unitaries[name][-1]

    @property
    def names(self):
        return tuple(self.unitaries)

    def summary(self):
        return {
            "T": self.T,
            "n_report": int(len(self.s_grid)),
            "propagators": list(self.names),
            "step_error_estimate": self.step_error_estimate,
            "errors": dict(self.errors),
            "n_steps": self.n_steps,
            "n_rejected": self.n_rejected,
            "tol_step": self.tol_step,
            "max_unitarity_defect": self.max_unitarity_defect,
        }


def evolve(fam, T, which=NAMES, tol_step=None, n_report=N_REPORT, max_steps=None):
    """Integrate ``i dU/ds = G(s) U``, ``U(0) = I``, for each requested generator.

    Steps are chosen so that ``||U_full - U_half||/3 <= tol_step`` for every
    propagator and ``d * ||G|| <= 0.1``. Raises StepBudgetError after
    ``max_steps`` attempted steps (default from ``ADIASTAB_MAX_STEPS`` or 2e6).
    """
    T = float(T)
    if not (T > 0 and np.isfinite(T)):
        raise ValueError(f"T must be positive and finite, got {T}")
    bad = set(which) - set(ALL_NAMES)
    which = tuple(w for w in ALL_NAMES if w in set(which))
    if bad or not which:
        raise ValueError(f"unknown or empty propagator selection: {sorted(bad) or which}")
    tol_step = fam.tol.step if tol_step is None else float(tol_step)
    max_steps = max_steps_default() if max_steps is None else int(max_steps)
    tol_reun = fam.tol.reunitarize
    n = fam.dim
    I = np.eye(n, dtype=complex)
    grid = np.linspace(0.0, 1.0, int(n_report))

    static_cache = {}

    static = fam.is_static()

    def gens(s):
        if static:
            if not static_cache:
                static_cache.update(generators(fam, 0.0, T, which))
            return static_cache
        return generators(fam, s, T, which)

    U = {w: I.copy() for w in which}
    store = {w: np.empty((len(grid), n, n), dtype=complex) for w in which}
    for w in which:
        store[w][0] = I
    acc = {w: 0.0 for w in which}
    worst_defect = 0.0

    s = 0.0
    k = 1
    g0 = max(op_norm(G) for G in gens(0.0).values())
    delta = min(grid[1] - grid[0], STEP_NORM_CAP / g0 if g0 > 0 else np.inf)
    d_min = 1e-14
    steps = rejected = 0
    while k < len(grid):
        if steps >= max_steps:
            raise StepBudgetError(
                f"integrator exceeded {max_steps} steps at s={s:.6g} (T={T:g}); "
                "raise tol_step or ADIASTAB_MAX_STEPS"
            )
        steps += 1
        target = grid[k]
        d = min(delta, target - s)
        land = d >= target - s
        full = {}
        gnorm = 0.0
        for w, G in gens(s + 0.5 * d).items():
            full[w], nw = _expm(G, d)
            gnorm = max(gnorm, nw)
        if d * gnorm > STEP_NORM_CAP * (1 + 1e-9) and d > d_min:
            delta = 0.999 * STEP_NORM_CAP / gnorm
            rejected += 1
            continue
        g1 = gens(s + 0.25 * d)
        g3 = gens(s + 0.75 * d)
        err = {}
        cand = {}
        for w in which:
            U1 = full[w] @ U[w]
            E1, _ = _expm(g1[w], 0.5 * d)
            E3, _ = _expm(g3[w], 0.5 * d)
            U2 = E3 @ (E1 @ U[w])
            err[w] = op_norm(U1 - U2) / 3.0
            cand[w] = U2 + (U2 - U1) / 3.0
        e = max(err.values())
        if e <= tol_step or d <= d_min:
            for w in which:
                V = cand[w]
                defect = unitarity_defect(V)
                if defect > tol_reun:
                    V = polar_unitary(V)
                    defect = unitarity_defect(V)
                worst_defect = max(worst_defect, defect)
                U[w] = V
                acc[w] += err[w]
            if land:
                s = float(target)
                for w in which:
                    store[w][k] = U[w]
                k += 1
            else:
                s += d
            factor = 2.0 if e == 0 else min(2.0, max(0.2, 0.9 * (tol_step / e) ** (1.0 / 3.0)))
            if not (land and d < delta) or factor < 1.0:
                delta = d * factor
            if gnorm > 0:
                delta = min(delta, 0.999 * STEP_NORM_CAP / gnorm)
        else:
            rejected += 1
            delta = d * max(0.2, 0.9 * (tol_step / e) ** (1.0 / 3.0))
    return PropagatorSet(
        T=T,
        s_grid=grid,
        unitaries=store,
        step_error_estimate=float(max(acc.values())),
        errors={w: float(v) for w, v in acc.items()},
        n_steps=steps,
        n_rejected=rejected,
        tol_step=tol_step,
        max_unitarity_defect=worst_defect,
    )


# -- derived quantities -------------------------------------------------------------

def grid_snapshots(fam, s_grid):
    return [snapshot(fam, s) for s in s_grid]


@dataclass
class EpsilonT:
    value: float
    theorem: float
    tunneling: float
    curves: dict


def epsilon_T(fam, T, props, snaps=None):
    """Leakage measure ``eps_T``: maximum over the reporting grid of all variants.

    Curves: ``ground`` = ``||P_lam(s)^perp U(s) lam(0)||``; ``window`` =
    ``||Pi(s)^perp U(s) Pi(0)||`` with ``Pi`` the spectral projector of ``A`` on
    ``(-inf, lam + 2h]``; ``local`` = ``||M(s)^perp U'_perp(s) P_mu(0)||``.
    """
    snaps = grid_snapshots(fam, props.s_grid) if snaps is None else snaps
    n = fam.dim
    I = np.eye(n)
    s0 = snaps[0]
    lam0 = s0.ground_vec
    Pi0 = s0.Pi
    Pmu0 = s0.P_mu
    ground, window, local = [], [], []
    for j, sn in enumerate(snaps):
        Uj = props["U"][j]
        ground.append(float(np.linalg.norm((I - sn.P_lambda) @ Uj @ lam0)))
        window.append(op_norm((I - sn.Pi) @ Uj @ Pi0))
        if "U_perp_prime" in props:
            local.append(op_norm(sn.M_perp @ props["U_perp_prime"][j] @ Pmu0))
    curves = {"ground": np.array(ground), "window": np.array(window)}
    if local:
        curves["local"] = np.array(local)
    loc = float(np.max(curves["local"])) if local else 0.0
    thm = max(float(np.max(curves["ground"])), loc)
    tun = max(float(np.max(curves["window"])), loc)
    return EpsilonT(max(thm, tun), thm, tun, curves)


def intertwining_residuals(fam, props, snaps=None):
    """``||V_ad(s) P_mu(0) V_ad(s)^dagger - P_mu(s)||`` on the reporting grid."""
    snaps = grid_snapshots(fam, props.s_grid) if snaps is None else snaps
    P0 = snaps[0].P_mu
    out = []
    for j, sn in enumerate(snaps):
        V = props["V_ad"][j]
        out.append(op_norm(V @ P0 @ V.conj().T - sn.P_mu))
    return np.array(out)


def verify_intertwining(fam, props, snaps=None):
    return float(np.max(intertwining_residuals(fam, props, snaps)))


def static_lhs(fam, T, s=0.0):
    """``||(exp(-i A T) - exp(-i mu T)) P_mu||`` from the eigendecomposition of ``A(s)``."""
    sn = snapshot(fam, s)
    w, V = sn.lambdas, sn.eigvecs
    E = (V * np.exp(-1j * T * w)) @ V.conj().T
    return op_norm((E - np.exp(-1j * sn.mu * T) * np.eye(fam.dim)) @ sn.P_mu)


@dataclass
class LHSErrors:
    main: float
    tunnel: float
    adiab: float
    static: float
    curves: dict

    def to_json(self):
        return {"main": self.main, "tunnel": self.tunnel, "adiab": self.adiab, "static": self.static}


def lhs_errors(fam, T, props, snaps=None):
    """Measured differences restricted to ``P_mu(0)``, at ``s = 1`` and along the grid.

    ``static`` is filled only for static families (closed form); otherwise NaN.
    """
    P0 = snapshot(fam, 0.0).P_mu if snaps is None else snaps[0].P_mu
    U, Up, Va = props["U"], props["U_perp_prime"], props["V_ad"]
    main = np.array([op_norm((U[j] - Va[j]) @ P0) for j in range(len(props.s_grid))])
    tun = np.array([op_norm((U[j] - Up[j]) @ P0) for j in range(len(props.s_grid))])
    adi = np.array([op_norm((Up[j] - Va[j]) @ P0) for j in range(len(props.s_grid))])
    stat = static_lhs(fam, T) if fam.is_static() else float("nan")
    return LHSErrors(
        float(main[-1]), float(tun[-1]), float(adi[-1]), stat,
        {"main": main, "tunnel": tun, "adiab": adi},
    )


def verify_vad_prime(fam, T, tol_step=1e-6, n_report=17):
    """``||(V'_ad(1) - V_ad(1)) P_mu(0)||``: the shift on ``Sbar`` must not reach ``P_mu``."""
    props = evolve(fam, T, which=("V_ad", "V_ad_prime"), tol_step=tol_step, n_report=n_report)
    P0 = snapshot(fam, 0.0).P_mu
    return op_norm((props.final("V_ad_prime") - props.final("V_ad")) @ P0), props.step_error_estimate


def unitarity_report(props):
    return max(unitarity_defect(props[w][j]) for w in props.names for j in range(len(props.s_grid)))


__all__ = [
    "ALL_NAMES",
    "EpsilonT",
    "LHSErrors",
    "NAMES",
    "PropagatorSet",
    "epsilon_T",
    "evolve",
    "generators",
    "grid_snapshots",
    "intertwining_residuals",
    "lhs_errors",
    "max_steps_default",
    "static_lhs",
    "unitarity_report",
    "verify_intertwining",
    "verify_vad_prime",
]
