"""Dense Hermitian matrix substrate.

Eigendecomposition with degeneracy clustering, spectral norms, projector
helpers, PSD square roots and unitary exponentials. All routines are pure
functions on numpy arrays.
"""

from dataclasses import dataclass

import numpy as np

from ._validation import DEFAULT_TOL, as_matrix, check_hermitian
from .exceptions import NotPSDError


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues and matching orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray

    def __len__(self):
        return len(self.values)

    def clusters(self, tol):
        """Group indices of eigenvalues closer than ``tol`` to their neighbour."""
        return cluster_indices(self.values, tol)

    def projector(self, idx):
        V = self.vectors[:, list(idx)]
        return V @ V.conj().T


def eigh(A, tol=DEFAULT_TOL.herm):
    """Full ascending eigensystem of a Hermitian matrix.

    Raises HermitianError when ``A`` is not Hermitian within ``tol`` relative
    to its largest entry. Within a degenerate cluster the returned vectors are
    an arbitrary orthonormal basis of the eigenspace.
    """
    A = check_hermitian(A, tol)
    w, V = np.linalg.eigh(A)
    return EigenSystem(w, V)


def cluster_indices(values, tol):
    """Split sorted ``values`` into runs where consecutive gaps are <= tol."""
    values = np.asarray(values)
    groups = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[i - 1] <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def cluster_tol(A, tol=DEFAULT_TOL.cluster):
    return tol * (op_norm(A) + 1.0)


def op_norm(A):
    """Spectral norm (largest singular value)."""
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    if not np.all(np.isfinite(A)):
        raise ValueError("op_norm: non-finite entries")
    if A.ndim == 1:
        return float(np.linalg.norm(A))
    return float(np.linalg.svd(A, compute_uv=False)[0])


def psd_sqrt(A, tol=DEFAULT_TOL.eig):
    """Principal square root of a positive semidefinite Hermitian matrix.

    Eigenvalues in ``[-tol * (||A||+1), 0)`` are clipped to zero; anything more
    negative raises NotPSDError.
    """
    es = eigh(A)
    floor = -tol * (float(np.max(np.abs(es.values), initial=0.0)) + 1.0)
    if es.values[0] < floor:
        raise NotPSDError(f"smallest eigenvalue {es.values[0]:.3e} < {floor:.3e}")
    w = np.sqrt(np.clip(es.values, 0.0, None))
    V = es.vectors
    return (V * w) @ V.conj().T


def unitary_exp(G, tau):
    """``exp(-i tau G)`` for Hermitian ``G`` via its eigendecomposition."""
    es = eigh(G)
    V = es.vectors
    return (V * np.exp(-1j * tau * es.values)) @ V.conj().T


def expm_hermitian_from_eig(values, vectors, tau):
    return (vectors * np.exp(-1j * tau * values)) @ vectors.conj().T


def polar_unitary(U):
    """Closest unitary to ``U`` in Frobenius norm."""
    W, _, Vh = np.linalg.svd(U)
    return W @ Vh


def unitarity_defect(U):
    U = np.asarray(U)
    return op_norm(U.conj().T @ U - np.eye(U.shape[0]))


def commutator(A, B):
    return A @ B - B @ A


def is_projector(P, tol=1e-9):
    P = np.asarray(P)
    return (
        op_norm(P @ P - P) <= tol
        and op_norm(P - P.conj().T) <= tol
        and abs(np.trace(P).real - round(np.trace(P).real)) <= tol * max(1, P.shape[0])
    )


def projector_rank(P):
    return int(round(float(np.trace(P).real)))


def coordinate_projector(n, indices):
    d = np.zeros(n)
    d[list(indices)] = 1.0
    return np.diag(d).astype(complex)


def reduced_resolvent(values, vectors, ground):
    """Reduced resolvent ``sum_j |v_j><v_j| / (e_j - e_0)`` over non-ground ``j``.

    ``ground`` lists the indices of the ground cluster; the reference energy is
    their mean.
    """
    ground = set(ground)
    e0 = float(np.mean(values[list(ground)]))
    rest = [j for j in range(len(values)) if j not in ground]
    if not rest:
        n = vectors.shape[0]
        return np.zeros((n, n), dtype=complex)
    V = vectors[:, rest]
    return (V / (values[rest] - e0)) @ V.conj().T


# -- matrix JSON wire format -------------------------------------------------

def matrix_to_json(A):
    A = as_matrix(A)
    return {
        "dim": int(A.shape[0]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in A],
    }


def matrix_from_json(obj, tol=DEFAULT_TOL.herm):
    """Parse ``{"dim": N, "entries": [[[re, im], ...], ...]}``; must be Hermitian."""
    if not isinstance(obj, dict) or "dim" not in obj or "entries" not in obj:
        raise ValueError('matrix JSON needs "dim" and "entries"')
    n = int(obj["dim"])
    if n < 2:
        raise ValueError(f"matrix JSON dim must be >= 2, got {n}")
    rows = obj["entries"]
    if len(rows) != n or any(len(r) != n for r in rows):
        raise ValueError(f"matrix JSON entries are not {n}x{n}")
    A = np.empty((n, n), dtype=complex)
    for i, row in enumerate(rows):
        for j, z in enumerate(row):
            if isinstance(z, (int, float)):
                A[i, j] = float(z)
            else:
                re, im = z
                A[i, j] = complex(float(re), float(im))
    return check_hermitian(A, tol)
