"""Input validation helpers and tolerance defaults."""

from dataclasses import dataclass, fields, replace

import numpy as np

from .exceptions import HermitianError


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances.

    Relative entries are multiplied by a problem scale (usually ``||A|| + 1``)
    at the point of use.
    """

    herm: float = 1e-12
    eig: float = 1e-10
    cluster: float = 1e-9
    block: float = 1e-12
    supp: float = 1e-12
    h_imag: float = 1e-10
    ineq: float = 1e-9
    ident: float = 1e-9
    unit: float = 1e-8
    step: float = 1e-8
    reunitarize: float = 1e-10

    def updated(self, **overrides):
        known = {f.name for f in fields(self)}
        bad = set(overrides) - known
        if bad:
            raise KeyError(f"unknown tolerance(s): {sorted(bad)}")
        return replace(self, **{k: float(v) for k, v in overrides.items()})


DEFAULT_TOL = Tolerances()


def as_matrix(A, name="A"):
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A.astype(complex) if not np.iscomplexobj(A) else A.astype(np.complex128)


def hermitian_defect(A):
    return float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0


def check_hermitian(A, tol=DEFAULT_TOL.herm, name="A"):
    """Return ``A`` as a complex array, raising HermitianError if it is not Hermitian.

    The tolerance is relative to the largest entry magnitude. The returned
    matrix is exactly Hermitian (symmetrized).
    """
    A = as_matrix(A, name)
    if A.shape[0] < 1:
        raise ValueError(f"{name} is empty")
    scale = float(np.max(np.abs(A))) if A.size else 0.0
    defect = hermitian_defect(A)
    if defect > tol * scale:
        raise HermitianError(defect, tol * scale)
    return 0.5 * (A + A.conj().T)


def check_s(s):
    s = float(s)
    if not (0.0 <= s <= 1.0) or not np.isfinite(s):
        raise ValueError(f"s must lie in [0, 1], got {s}")
    return s


def check_s_grid(s_grid):
    if np.isscalar(s_grid):
        n = int(s_grid)
        if n < 2:
            raise ValueError("an s-grid needs at least 2 points")
        return np.linspace(0.0, 1.0, n)
    grid = np.asarray(s_grid, dtype=float).ravel()
    if grid.size == 0:
        raise ValueError("empty s-grid")
    if np.any(grid < 0) or np.any(grid > 1):
        raise ValueError("s-grid values must lie in [0, 1]")
    return grid
