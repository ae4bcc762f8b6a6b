"""Cheeger-ratio minimisation over coordinate cuts, balance (sign-gauge) test, ``Q`` and ``gamma_tilde``."""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ._validation import DEFAULT_TOL, check_hermitian, check_s_grid
from .exceptions import CutSizeError
from .spectral import ground_state

DEFAULT_MAX_DIM = 16


def canonical_cut(indices, n):
    """Representative of ``{S, complement}``: the smaller side, ties broken lexicographically."""
    S = tuple(sorted(int(i) for i in indices))
    Sc = tuple(i for i in range(n) if i not in set(S))
    if not S or not Sc:
        raise ValueError("a cut must be a nonempty proper subset")
    return min(S, Sc, key=lambda t: (len(t), t))


def _cut_masks(n):
    """Boolean indicator rows for one representative of every complement pair."""
    K = 2 ** (n - 1) - 1
    codes = np.arange(1, K + 1, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(n - 1)[None, :]) & 1).astype(bool)
    # index n-1 always in the complement, so each pair appears once
    return np.concatenate([bits, np.zeros((K, 1), dtype=bool)], axis=1)


def cut_ratios(A, ground_vec, masks, tol=DEFAULT_TOL):
    """Cheeger ratio of every cut in ``masks`` for one Hamiltonian and ground vector.

    ``h_S = -Re sum_{i notin S, j in S} conj(v_i) A_ij v_j / min(mass_S, mass_Sbar)``,
    zero when the smaller mass is at most ``tol.supp``.
    """
    v = np.asarray(ground_vec, dtype=complex)
    v = v / np.linalg.norm(v)
    W = np.conj(v)[:, None] * A * v[None, :]
    W = W - np.diag(np.diag(W))
    Mf = masks.astype(float)
    num = -np.real(np.einsum("ki,ij,kj->k", 1.0 - Mf, W, Mf))
    mass_s = Mf @ (np.abs(v) ** 2)
    mmin = np.minimum(mass_s, 1.0 - mass_s)
    return np.where(mmin > tol.supp, num / np.where(mmin > tol.supp, mmin, 1.0), 0.0)


@dataclass
class CutSearchResult:
    best_cut: tuple
    h_min: float
    evaluated_cuts: int
    s_grid: np.ndarray
    h_curve: np.ndarray
    cheeger_curve: np.ndarray
    balanced: bool = None
    Q: float = None
    gamma_tilde: float = None
    gamma_tilde_curve: np.ndarray = None
    ties: list = field(default_factory=list)

    def to_json(self):
        out = {
            "best_cut": list(self.best_cut),
            "h_min": self.h_min,
            "evaluated_cuts": self.evaluated_cuts,
            "s": self.s_grid.tolist(),
            "h_best_cut": self.h_curve.tolist(),
            "cheeger_constant": self.cheeger_curve.tolist(),
            "balanced": self.balanced,
            "Q": self.Q,
            "gamma_tilde": self.gamma_tilde,
            "n_ties": len(self.ties),
        }
        if self.gamma_tilde_curve is not None:
            out["gamma_tilde_curve"] = self.gamma_tilde_curve.tolist()
        return out


def _as_matrix_fn(source):
    if callable(getattr(source, "A", None)):
        return source.A, source.dim, getattr(source, "tol", DEFAULT_TOL)
    if callable(source):
        n = np.asarray(source(0.0)).shape[0]
        return source, n, DEFAULT_TOL
    A = check_hermitian(source)
    return (lambda s: A), A.shape[0], DEFAULT_TOL


def min_cut(source, s_grid=17, max_dim=DEFAULT_MAX_DIM):
    """Exhaustive search for the cut minimising ``max_s h_S(s)``.

    ``source`` is a GradedFamily, a callable ``s -> A(s)`` or a single matrix.
    All ``2^(N-1) - 1`` cuts are scored; ties within ``1e-12`` are broken by
    smallest ``|S|`` then lexicographic order. Raises CutSizeError when
    ``N > max_dim``.
    """
    A_of, n, tol = _as_matrix_fn(source)
    if n > max_dim:
        raise CutSizeError(
            f"exhaustive cut search needs N <= {max_dim}, got N = {n}; pass an explicit cut"
        )
    grid = check_s_grid(s_grid)
    masks = _cut_masks(n)
    H = np.empty((len(grid), len(masks)))
    gt = []
    balanced = True
    Qs = []
    for a, s in enumerate(grid):
        A = A_of(s)
        _, v, es = ground_state(A, tol)
        H[a] = cut_ratios(A, v, masks, tol)
        bal = balance_and_gamma_tilde(A, gamma=es.values[1] - es.values[0])
        balanced &= bal.balanced
        Qs.append(bal.Q)
        gt.append(bal.gamma_tilde)
    objective = H.max(axis=0)
    best = float(objective.min())
    tie_tol = 1e-12 * (1.0 + abs(best))
    cand = np.flatnonzero(objective <= best + tie_tol)
    reps = sorted(
        (canonical_cut(np.flatnonzero(masks[k]), n), k) for k in cand
    )
    reps.sort(key=lambda t: (len(t[0]), t[0]))
    best_cut, k_best = reps[0]
    gt = np.array(gt)
    return CutSearchResult(
        best_cut=best_cut,
        h_min=float(objective[k_best]),
        evaluated_cuts=int(len(masks)),
        s_grid=grid,
        h_curve=H[:, k_best].copy(),
        cheeger_curve=H.min(axis=1),
        balanced=bool(balanced),
        Q=float(max(Qs)),
        gamma_tilde=float(gt.min()),
        gamma_tilde_curve=gt,
        ties=[r[0] for r in reps[1:]],
    )


def cut_profile(source, cut, s_grid=17):
    """``h_S(s)`` for one explicit cut."""
    A_of, n, tol = _as_matrix_fn(source)
    grid = check_s_grid(s_grid)
    m = np.zeros((1, n), dtype=bool)
    m[0, list(cut)] = True
    out = []
    for s in grid:
        A = A_of(s)
        _, v, _ = ground_state(A, tol)
        out.append(cut_ratios(A, v, m, tol)[0])
    return grid, np.array(out)


# -- balance ------------------------------------------------------------------

@dataclass
class BalanceResult:
    balanced: bool
    gauge: np.ndarray
    Q: float
    gamma: float
    gamma_tilde: float
    worst_edge: float = 0.0


def off_diagonal_row_sum(M):
    """``Q = max_i sum_{j != i} |M_ij|``."""
    M = np.abs(np.asarray(M))
    return float(np.max(M.sum(axis=1) - np.diag(M)))


def sign_gauge(A, tol=1e-12):
    """Diagonal unit-modulus gauge ``z`` making every ``conj(z_i) A_ij z_j`` real and <= 0.

    Phases are propagated along a BFS spanning forest of the off-diagonal
    support graph; every non-tree edge is then verified. Returns ``(z, worst)``
    where ``worst`` is the largest violation (0 when balanced).
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    scale = max(float(np.max(np.abs(A))), 1e-300)
    adj = (np.abs(A) > tol * scale) & ~np.eye(n, dtype=bool)
    z = np.zeros(n, dtype=complex)
    for root in range(n):
        if z[root] != 0:
            continue
        z[root] = 1.0
        queue = deque([root])
        while queue:
            i = queue.popleft()
            for j in np.flatnonzero(adj[i]):
                if z[j] == 0:
                    z[j] = -abs(A[i, j]) * z[i] / A[i, j]
                    queue.append(j)
    G = np.conj(z)[:, None] * A * z[None, :]
    viol = np.where(adj, np.abs(G + np.abs(A)), 0.0)
    return z, float(viol.max(initial=0.0)) / scale


def balance_and_gamma_tilde(A, gamma=None, Q_matrix=None, tol=1e-9):
    """Balance test, ``Q`` and ``gamma_tilde = sqrt(gamma (2Q + gamma))``.

    ``Q`` is taken from ``Q_matrix`` when given (for example the block-diagonal
    part only), otherwise from ``A``.
    """
    A = check_hermitian(A)
    z, worst = sign_gauge(A)
    if gamma is None:
        w = np.linalg.eigvalsh(A)
        gamma = float(w[1] - w[0])
    Q = off_diagonal_row_sum(A if Q_matrix is None else Q_matrix)
    gt = float(np.sqrt(max(gamma, 0.0) * (2 * Q + gamma)))
    return BalanceResult(bool(worst <= tol), z, Q, float(gamma), gt, worst)
