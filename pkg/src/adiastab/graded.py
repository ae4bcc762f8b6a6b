"""Graded Hamiltonian families ``A(s) = H(s) + Delta(s)``.

``H`` commutes with the coordinate projectors onto ``S`` and its complement,
``Delta`` maps ``S`` into ``Sbar`` and back. Schedules carry analytic first
and second derivatives.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from ._validation import DEFAULT_TOL, check_hermitian, check_s, check_s_grid
from .exceptions import GradingError, StructureError
from .linalg import (
    cluster_indices,
    eigh,
    matrix_from_json,
    matrix_to_json,
    op_norm,
)


# -- grading ------------------------------------------------------------------

class Grading:
    """Fixed bipartition of ``{0..N-1}`` into ``S`` and ``Sbar``."""

    def __init__(self, dim, s_indices):
        dim = int(dim)
        idx = sorted({int(i) for i in s_indices})
        if dim < 2:
            raise GradingError(f"dimension must be >= 2, got {dim}")
        if not idx:
            raise GradingError("S must be nonempty")
        if idx[0] < 0 or idx[-1] >= dim:
            raise GradingError(f"S indices must lie in [0, {dim - 1}]")
        if len(idx) == dim:
            raise GradingError("S must be a proper subset (Sbar is empty)")
        self.dim = dim
        self.s_indices = tuple(idx)
        self.sbar_indices = tuple(i for i in range(dim) if i not in set(idx))
        mask = np.zeros(dim, dtype=bool)
        mask[list(idx)] = True
        self._in_s = mask

    def __repr__(self):
        return f"Grading(dim={self.dim}, s_indices={list(self.s_indices)})"

    def __eq__(self, other):
        return isinstance(other, Grading) and (self.dim, self.s_indices) == (
            other.dim,
            other.s_indices,
        )

    def __hash__(self):
        return hash((self.dim, self.s_indices))

    @property
    def in_s(self):
        return self._in_s.copy()

    @property
    def P_S(self):
        return np.diag(self._in_s.astype(float)).astype(complex)

    @property
    def P_Sbar(self):
        return np.diag((~self._in_s).astype(float)).astype(complex)

    @property
    def diag_mask(self):
        """Elementwise mask selecting the block-diagonal part."""
        return np.equal.outer(self._in_s, self._in_s)

    @property
    def offdiag_mask(self):
        return ~self.diag_mask

    def complement(self):
        return Grading(self.dim, self.sbar_indices)


# -- schedules ------------------------------------------------------------------

class Schedule:
    """Twice differentiable matrix-valued function of ``s`` in [0, 1]."""

    kind = None
    dim = None

    def value(self, s):
        raise NotImplementedError

    def d1(self, s):
        raise NotImplementedError

    def d2(self, s):
        raise NotImplementedError

    def is_constant(self):
        return False

    def to_json(self):
        raise NotImplementedError(f"{type(self).__name__} has no wire format")

    def __add__(self, other):
        return SumSchedule([self, other])

    def masked(self, mask):
        return MaskedSchedule(self, mask)


def _herm(M):
    return 0.5 * (M + M.conj().T)


class PolynomialSchedule(Schedule):
    """``M(s) = sum_k C_k s^k`` for Hermitian coefficient matrices."""

    kind = "cubic-polynomial"

    def __init__(self, coeffs):
        coeffs = [check_hermitian(C, name=f"C{k}") for k, C in enumerate(coeffs)]
        if not coeffs:
            raise ValueError("need at least one coefficient")
        shapes = {C.shape for C in coeffs}
        if len(shapes) != 1:
            raise ValueError(f"coefficient shapes differ: {shapes}")
        self.coeffs = coeffs
        self.dim = coeffs[0].shape[0]

    def _eval(self, s, order):
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for k, C in enumerate(self.coeffs):
            if k < order:
                continue
            fac = 1.0
            for j in range(order):
                fac *= k - j
            out += fac * s ** (k - order) * C
        return out

    def value(self, s):
        return self._eval(s, 0)

    def d1(self, s):
        return self._eval(s, 1)

    def d2(self, s):
        return self._eval(s, 2)

    def is_constant(self):
        return all(not np.any(C) for C in self.coeffs[1:])

    def to_json(self):
        coeffs = list(self.coeffs) + [np.zeros_like(self.coeffs[0])] * (4 - len(self.coeffs))
        if len(coeffs) > 4:
            raise NotImplementedError("only cubic polynomials have a wire format")
        return {"kind": self.kind, "coeffs": [matrix_to_json(C) for C in coeffs]}

    def map(self, f):
        return type(self)([f(C) for C in self.coeffs])


class LinearSchedule(PolynomialSchedule):
    """``M(s) = (1 - s) M0 + s M1``."""

    kind = "linear-interpolation"

    def __init__(self, M0, M1=None):
        M0 = check_hermitian(M0, name="M0")
        M1 = M0 if M1 is None else check_hermitian(M1, name="M1")
        self.M0, self.M1 = M0, M1
        super().__init__([M0, M1 - M0])

    def to_json(self):
        return {"kind": self.kind, "M0": matrix_to_json(self.M0), "M1": matrix_to_json(self.M1)}

    def map(self, f):
        return LinearSchedule(f(self.M0), f(self.M1))


class SplineSchedule(Schedule):
    """Entrywise cubic spline through tabulated Hermitian matrices."""

    kind = "tabulated-spline"

    def __init__(self, knots, matrices):
        knots = np.asarray(knots, dtype=float)
        mats = np.array([check_hermitian(M) for M in matrices])
        if knots.ndim != 1 or len(knots) != len(mats) or len(knots) < 2:
            raise ValueError("need matching knots and matrices (at least 2)")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("spline knots must be strictly increasing")
        if knots[0] > 0 or knots[-1] < 1:
            raise ValueError("spline knots must cover [0, 1]")
        self.knots = knots
        self.matrices = mats
        self.dim = mats.shape[1]
        self._re = CubicSpline(knots, mats.real, axis=0)
        self._im = CubicSpline(knots, mats.imag, axis=0)

    def _eval(self, s, nu):
        M = self._re(s, nu) + 1j * self._im(s, nu)
        return _herm(M)

    def value(self, s):
        return self._eval(s, 0)

    def d1(self, s):
        return self._eval(s, 1)

    def d2(self, s):
        return self._eval(s, 2)

    def is_constant(self):
        return bool(np.all(self.matrices == self.matrices[0]))

    def to_json(self):
        return {
            "kind": self.kind,
            "knots": [float(k) for k in self.knots],
            "matrices": [matrix_to_json(M) for M in self.matrices],
        }

    def map(self, f):
        return SplineSchedule(self.knots, [f(M) for M in self.matrices])


class ConjugatedSchedule(Schedule):
    """``M(s) = W(s) M0 W(s)^dagger`` with ``W(s) = exp(-i omega s G)``.

    Rotating a block by a Hermitian generator keeps the spectrum fixed while
    the eigenvectors move at a constant rate.
    """

    kind = "conjugated"

    def __init__(self, M0, G, omega=1.0):
        self.M0 = check_hermitian(M0, name="M0")
        self.G = check_hermitian(G, name="G")
        self.omega = float(omega)
        self.dim = self.M0.shape[0]
        es = eigh(self.G)
        self._gw, self._gv = es.values, es.vectors

    def _W(self, s):
        return (self._gv * np.exp(-1j * self.omega * s * self._gw)) @ self._gv.conj().T

    def value(self, s):
        W = self._W(s)
        return _herm(W @ self.M0 @ W.conj().T)

    def d1(self, s):
        M = self.value(s)
        return _herm(-1j * self.omega * (self.G @ M - M @ self.G))

    def d2(self, s):
        M = self.value(s)
        C = self.G @ M - M @ self.G
        return _herm(-self.omega ** 2 * (self.G @ C - C @ self.G))

    def is_constant(self):
        return self.omega == 0 or not np.any(self.G @ self.M0 - self.M0 @ self.G)

    def to_json(self):
        return {
            "kind": self.kind,
            "M0": matrix_to_json(self.M0),
            "G": matrix_to_json(self.G),
            "omega": self.omega,
        }


class SumSchedule(Schedule):
    kind = "sum"

    def __init__(self, parts):
        self.parts = list(parts)
        self.dim = self.parts[0].dim

    def value(self, s):
        return sum(p.value(s) for p in self.parts)

    def d1(self, s):
        return sum(p.d1(s) for p in self.parts)

    def d2(self, s):
        return sum(p.d2(s) for p in self.parts)

    def is_constant(self):
        return all(p.is_constant() for p in self.parts)

    def to_json(self):
        return {"kind": self.kind, "parts": [p.to_json() for p in self.parts]}


class MaskedSchedule(Schedule):
    """Entrywise mask of another schedule; derivatives commute with the mask."""

    kind = "masked"

    def __init__(self, base, mask):
        self.base = base
        self.mask = np.asarray(mask, dtype=bool)
        self.dim = base.dim

    def value(self, s):
        return np.where(self.mask, self.base.value(s), 0.0)

    def d1(self, s):
        return np.where(self.mask, self.base.d1(s), 0.0)

    def d2(self, s):
        return np.where(self.mask, self.base.d2(s), 0.0)

    def is_constant(self):
        return self.base.is_constant()

    def to_json(self):
        if hasattr(self.base, "map"):
            return self.base.map(lambda M: np.where(self.mask, M, 0.0)).to_json()
        return super().to_json()


def constant_schedule(M):
    return LinearSchedule(M, M)


def schedule_from_json(obj):
    kind = obj.get("kind")
    if kind == "linear-interpolation":
        return LinearSchedule(matrix_from_json(obj["M0"]), matrix_from_json(obj["M1"]))
    if kind == "cubic-polynomial":
        return PolynomialSchedule([matrix_from_json(c) for c in obj["coeffs"]])
    if kind == "tabulated-spline":
        return SplineSchedule(obj["knots"], [matrix_from_json(m) for m in obj["matrices"]])
    if kind == "conjugated":
        return ConjugatedSchedule(
            matrix_from_json(obj["M0"]), matrix_from_json(obj["G"]), obj.get("omega", 1.0)
        )
    if kind == "sum":
        return SumSchedule([schedule_from_json(p) for p in obj["parts"]])
    raise ValueError(f"unknown schedule kind {kind!r}")


# -- family -------------------------------------------------------------------

@dataclass(frozen=True)
class Blocks:
    H_S: np.ndarray
    H_Sbar: np.ndarray
    Delta: np.ndarray
    A: np.ndarray

    @property
    def H(self):
        return self.H_S + self.H_Sbar

    def __iter__(self):
        return iter((self.H_S, self.H_Sbar, self.Delta, self.A))


@dataclass(frozen=True)
class Derivatives:
    Hdot: np.ndarray
    Hddot: np.ndarray
    Ddot: np.ndarray
    Hdot_S: np.ndarray
    Hdot_Sbar: np.ndarray
    Hddot_S: np.ndarray
    Hddot_Sbar: np.ndarray

    def __iter__(self):
        return iter((self.Hdot, self.Hddot, self.Ddot, self.Hdot_S, self.Hdot_Sbar))


class GradedFamily:
    """``s -> (H(s), Delta(s))`` respecting a fixed grading.

    Block structure is validated on a sample grid at construction; entries
    violating it by at most ``tol.block * ||A||`` are projected away whenever
    the family is evaluated.
    """

    def __init__(self, grading, h_schedule, delta_schedule, name=None, tol=DEFAULT_TOL,
                 check_grid=17):
        if h_schedule.dim != grading.dim or delta_schedule.dim != grading.dim:
            raise GradingError(
                f"schedule dimension ({h_schedule.dim}, {delta_schedule.dim}) "
                f"does not match grading dimension {grading.dim}"
            )
        self.grading = grading
        self.h_schedule = h_schedule
        self.delta_schedule = delta_schedule
        self.name = name or "family"
        self.tol = tol
        self._dmask = grading.diag_mask
        for s in np.linspace(0.0, 1.0, check_grid):
            self.blocks(s)

    @property
    def dim(self):
        return self.grading.dim

    def __repr__(self):
        return f"GradedFamily(name={self.name!r}, grading={self.grading!r})"

    def is_static(self):
        return self.h_schedule.is_constant() and self.delta_schedule.is_constant()

    def _split(self, H, D, what):
        for label, M, bad in (
            ("||P_S H P_Sbar||", H, ~self._dmask),
            ("||P_S Delta P_S|| or ||P_Sbar Delta P_Sbar||", D, self._dmask),
        ):
            leak = np.where(bad, M, 0.0)
            if np.any(leak):
                tol = self.tol.block * max(op_norm(H + D), 1e-300)
                nrm = op_norm(leak)
                if nrm > tol:
                    raise StructureError(f"{label} ({what})", nrm, tol)
        return np.where(self._dmask, H, 0.0), np.where(self._dmask, 0.0, D)

    def blocks(self, s):
        """``(H_S, H_Sbar, Delta, A)`` at ``s``; ``H_S + H_Sbar + Delta == A``."""
        s = check_s(s)
        H, D = self._split(self.h_schedule.value(s), self.delta_schedule.value(s), "value")
        in_s = self.grading._in_s
        m_s = np.outer(in_s, in_s)
        H_S = np.where(m_s, H, 0.0)
        H_Sbar = H - H_S
        return Blocks(H_S, H_Sbar, D, H_S + H_Sbar + D)

    def A(self, s):
        return self.blocks(s).A

    def derivatives(self, s):
        s = check_s(s)
        Hd, Dd = self._split(self.h_schedule.d1(s), self.delta_schedule.d1(s), "d/ds")
        Hdd, _ = self._split(self.h_schedule.d2(s), self.delta_schedule.d2(s), "d2/ds2")
        m_s = np.outer(self.grading._in_s, self.grading._in_s)
        Hd_S = np.where(m_s, Hd, 0.0)
        Hdd_S = np.where(m_s, Hdd, 0.0)
        return Derivatives(Hd, Hdd, Dd, Hd_S, Hd - Hd_S, Hdd_S, Hdd - Hdd_S)

    def A_dot(self, s):
        d = self.derivatives(s)
        return d.Hdot + d.Ddot

    def total_schedule(self):
        return SumSchedule([self.h_schedule, self.delta_schedule])

    def regrade(self, s_indices, name=None):
        """Same ``A(s)`` split along a different coordinate bipartition."""
        g = Grading(self.dim, s_indices)
        total = self.total_schedule()
        return GradedFamily(
            g,
            MaskedSchedule(total, g.diag_mask),
            MaskedSchedule(total, g.offdiag_mask),
            name=name or f"{self.name}|S={list(g.s_indices)}",
            tol=self.tol,
        )

    @classmethod
    def from_total(cls, grading, schedule, name=None, tol=DEFAULT_TOL):
        """Split a schedule for ``A(s)`` into block-diagonal and off-diagonal parts."""
        return cls(
            grading,
            MaskedSchedule(schedule, grading.diag_mask),
            MaskedSchedule(schedule, grading.offdiag_mask),
            name=name,
            tol=tol,
        )

    def to_json(self):
        return {
            "name": self.name,
            "grading": list(self.grading.s_indices),
            "dim": self.dim,
            "schedule": {"H": self.h_schedule.to_json(), "D": self.delta_schedule.to_json()},
        }


def family_from_json(obj, name=None):
    """Load a family, enforcing every invariant at parse time.

    Accepts ``{"grading": [...], "schedule": {"kind": "linear-interpolation",
    "H0", "H1", "D0", "D1"}}`` and the general ``{"H": schedule, "D": schedule}``
    form written by :meth:`GradedFamily.to_json`.
    """
    if "grading" not in obj:
        raise KeyError("grading")
    if "schedule" not in obj:
        raise KeyError("schedule")
    sched = obj["schedule"]
    kind = sched.get("kind")
    if kind == "linear-interpolation" and "H0" in sched:
        H = LinearSchedule(matrix_from_json(sched["H0"]), matrix_from_json(sched["H1"]))
        D = LinearSchedule(matrix_from_json(sched["D0"]), matrix_from_json(sched["D1"]))
    elif kind == "cubic-polynomial" and "H" in sched:
        H = PolynomialSchedule([matrix_from_json(c) for c in sched["H"]])
        D = PolynomialSchedule([matrix_from_json(c) for c in sched["D"]])
    elif kind == "tabulated-spline" and "H" in sched:
        H = SplineSchedule(sched["knots"], [matrix_from_json(m) for m in sched["H"]])
        D = SplineSchedule(sched["knots"], [matrix_from_json(m) for m in sched["D"]])
    elif "H" in sched and "D" in sched:
        H = schedule_from_json(sched["H"])
        D = schedule_from_json(sched["D"])
    else:
        raise ValueError(f"unrecognised schedule object (kind={kind!r})")
    dim = H.dim
    return GradedFamily(Grading(dim, obj["grading"]), H, D, name=name or obj.get("name"))


# -- local spectra --------------------------------------------------------------

@dataclass(frozen=True)
class LocalSpectrum:
    """Ground data of one diagonal block, embedded in the full space.

    ``gap`` is ``+inf`` for a block whose spectrum is a single cluster.
    """

    indices: tuple
    values: np.ndarray
    vectors: np.ndarray  # N x k, columns supported on ``indices``
    ground: list
    mu: float
    mu1: float
    P: np.ndarray
    R: np.ndarray

    @property
    def gap(self):
        return self.mu1 - self.mu

    @property
    def rank(self):
        return len(self.ground)

    @property
    def one_dimensional(self):
        return not np.isfinite(self.mu1)


def local_spectrum(H, indices, cluster_tol):
    """Eigen-data of ``H`` restricted to the coordinate subspace ``indices``."""
    idx = list(indices)
    n = H.shape[0]
    es = eigh(H[np.ix_(idx, idx)])
    V = np.zeros((n, len(idx)), dtype=complex)
    V[idx, :] = es.vectors
    groups = cluster_indices(es.values, cluster_tol)
    ground = groups[0]
    mu = float(np.mean(es.values[ground]))
    mu1 = float(es.values[groups[1][0]]) if len(groups) > 1 else np.inf
    Vg = V[:, ground]
    P = Vg @ Vg.conj().T
    rest = [j for j in range(len(idx)) if j not in set(ground)]
    if rest:
        Vr = V[:, rest]
        R = (Vr / (es.values[rest] - mu)) @ Vr.conj().T
    else:
        R = np.zeros((n, n), dtype=complex)
    return LocalSpectrum(tuple(idx), es.values, V, ground, mu, mu1, P, R)


def local_spectra(fam_or_grading, H, tol=DEFAULT_TOL):
    grading = getattr(fam_or_grading, "grading", fam_or_grading)
    ctol = tol.cluster * (op_norm(H) + 1.0)
    return (
        local_spectrum(H, grading.s_indices, ctol),
        local_spectrum(H, grading.sbar_indices, ctol),
    )


def min_gap(*gaps):
    """Minimum over finite gaps; ``inf`` if none is finite."""
    finite = [g for g in gaps if np.isfinite(g)]
    return min(finite) if finite else np.inf


# -- assumptions ----------------------------------------------------------------

@dataclass
class AssumptionReport:
    s: np.ndarray
    assumption1: np.ndarray
    assumption2: np.ndarray
    c: np.ndarray
    c_limit: np.ndarray
    support_on_S: np.ndarray
    one_dimensional_block: np.ndarray
    notes: list = field(default_factory=list)

    @property
    def holds(self):
        return bool(np.all(self.assumption1) and np.all(self.assumption2))

    def to_json(self):
        return {
            "s": self.s.tolist(),
            "assumption1": self.assumption1.tolist(),
            "assumption2": self.assumption2.tolist(),
            "c": self.c.tolist(),
            "c_limit": self.c_limit.tolist(),
            "support_on_S": self.support_on_S.tolist(),
            "one_dimensional_block": self.one_dimensional_block.tolist(),
            "holds": self.holds,
            "notes": list(self.notes),
        }


def check_assumptions(fam, s_grid):
    """Evaluate both structural assumptions on ``s_grid``.

    Assumption 1: ``min(mu_1, mubar_1) > max(mu, mubar)``. Assumption 2:
    ``c = ||Delta|| / min(Gamma_S, Gamma_Sbar) <= 1 - h / min(Gamma_S, Gamma_Sbar)``.
    A one-dimensional block has no first excited level; its gap is treated as
    infinite and flagged.
    """
    from .spectral import snapshot

    grid = check_s_grid(s_grid)
    a1, a2, cs, lim, supp, onedim = [], [], [], [], [], []
    notes = []
    for s in grid:
        snap = snapshot(fam, s)
        a1.append(min(snap.mu1, snap.mubar1) > max(snap.mu, snap.mubar))
        g = snap.min_gap
        c = snap.c
        limit = 1.0 - snap.h / g if np.isfinite(g) else 1.0
        cs.append(c)
        lim.append(limit)
        a2.append(bool(c <= limit + fam.tol.ineq))
        supp.append(snap.support_on_S)
        onedim.append(not (np.isfinite(snap.mu1) and np.isfinite(snap.mubar1)))
        if not snap.support_on_S:
            notes.append(f"s={s:g}: ground state has no support on S")
    return AssumptionReport(
        grid,
        np.array(a1, dtype=bool),
        np.array(a2, dtype=bool),
        np.array(cs),
        np.array(lim),
        np.array(supp, dtype=bool),
        np.array(onedim, dtype=bool),
        notes,
    )


def unitary_rotation_generator(dim, i, j):
    """Hermitian generator of a real rotation in the ``(i, j)`` plane (sigma_y)."""
    G = np.zeros((dim, dim), dtype=complex)
    G[i, j] = -1j
    G[j, i] = 1j
    return G


__all__ = [
    "AssumptionReport",
    "Blocks",
    "ConjugatedSchedule",
    "Derivatives",
    "GradedFamily",
    "Grading",
    "LinearSchedule",
    "LocalSpectrum",
    "MaskedSchedule",
    "PolynomialSchedule",
    "Schedule",
    "SplineSchedule",
    "SumSchedule",
    "check_assumptions",
    "constant_schedule",
    "family_from_json",
    "local_spectra",
    "local_spectrum",
    "min_gap",
    "schedule_from_json",
    "unitary_rotation_generator",
]
