"""Builtin graded families.

Every generator returns a validated :class:`GradedFamily`. Random families
draw from ``numpy.random.default_rng`` seeded through ``SeedSequence`` so a
single integer seed reproduces a whole ensemble.
"""

import numpy as np

from ._validation import check_hermitian
from .graded import (
    ConjugatedSchedule,
    GradedFamily,
    Grading,
    LinearSchedule,
    constant_schedule,
    local_spectra,
    min_gap,
    unitary_rotation_generator,
)
from .linalg import op_norm


def double_well(delta=0.05, asymmetry=0.2, constant=False, rotation=0.0):
    """Four levels, ``S = {0, 1}``; ``H_S = diag(0, 1)``, ``H_Sbar = diag(a, 1 + a)``.

    ``Delta`` couples levels 0 and 2 with strength ``-delta (1 - s/2)`` (or
    ``-delta`` when ``constant``), so ``h > 0`` on all of ``[0, 1]``. A nonzero ``rotation`` turns the ``S`` block
    at angular rate ``rotation`` in the (0, 1) plane.
    """
    a = float(asymmetry)
    H0 = np.diag([0.0, 1.0, a, 1.0 + a]).astype(complex)
    D = np.zeros((4, 4), dtype=complex)
    D[0, 2] = D[2, 0] = -float(delta)
    g = Grading(4, [0, 1])
    if rotation:
        H = ConjugatedSchedule(H0, unitary_rotation_generator(4, 0, 1), rotation)
    else:
        H = constant_schedule(H0)
    Dsched = constant_schedule(D) if constant else LinearSchedule(D, 0.5 * D)
    name = f"double-well(delta={delta:g}, asymmetry={a:g}"
    name += ", constant" if constant else ""
    name += f", rotation={rotation:g})" if rotation else ")"
    return GradedFamily(g, H, Dsched, name=name)


def rotating_block(omega=1.0, coupling=0.05, asymmetry=0.2, constant_coupling=False):
    """Double well whose ``S`` block eigenvectors rotate at rate ``omega``."""
    fam = double_well(coupling, asymmetry, constant=constant_coupling, rotation=omega)
    fam.name = f"rotating-block(omega={omega:g}, coupling={coupling:g})"
    return fam


def _random_block_diag(rng, g, stoquastic, scale=1.0):
    n = g.dim
    if stoquastic:
        X = -np.abs(rng.normal(size=(n, n)))
        X = np.triu(X, 1)
        X = X + X.T + np.diag(rng.normal(size=n) * 2.0)
    else:
        X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        X = 0.5 * (X + X.conj().T)
    return scale * np.where(g.diag_mask, X, 0.0).astype(complex)


def _random_offdiag(rng, g, stoquastic):
    n = g.dim
    if stoquastic:
        X = -np.abs(rng.normal(size=(n, n)))
        X = np.triu(X, 1)
        X = X + X.T
    else:
        X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        X = 0.5 * (X + X.conj().T)
    return np.where(g.offdiag_mask, X, 0.0).astype(complex)


def random_graded(n=8, n_s=None, c=0.3, stoquastic=False, seed=0, check_grid=33):
    """Linear schedule between random block-diagonal ``H`` endpoints.

    ``Delta`` endpoints are drawn likewise and rescaled so that
    ``max_s ||Delta(s)|| = c * min_s min(Gamma_S, Gamma_Sbar)`` on a
    ``check_grid``-point grid. With ``stoquastic`` every off-diagonal entry
    is real and nonpositive.
    """
    n = int(n)
    n_s = n // 2 if n_s is None else int(n_s)
    rng = np.random.default_rng(seed)
    g = Grading(n, range(n_s))
    H0 = _random_block_diag(rng, g, stoquastic)
    H1 = _random_block_diag(rng, g, stoquastic)
    D0 = _random_offdiag(rng, g, stoquastic)
    D1 = _random_offdiag(rng, g, stoquastic)
    grid = np.linspace(0.0, 1.0, check_grid)
    gaps = []
    dnorm = 0.0
    for s in grid:
        H = (1 - s) * H0 + s * H1
        ls, lsb = local_spectra(g, H)
        gaps.append(min_gap(ls.gap, lsb.gap))
        dnorm = max(dnorm, op_norm((1 - s) * D0 + s * D1))
    gmin = min(gaps)
    k = float(c) * gmin / dnorm if dnorm > 0 and np.isfinite(gmin) else 0.0
    name = f"random-graded(n={n}, n_s={n_s}, c={c:g}, stoquastic={bool(stoquastic)}, seed={seed})"
    return GradedFamily(g, LinearSchedule(H0, H1), LinearSchedule(k * D0, k * D1), name=name)


def ensemble_seeds(seed, count):
    """Independent child seeds for an ensemble, derived from one root seed."""
    children = np.random.SeedSequence(int(seed)).spawn(int(count))
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def random_ensemble(count, seed=0, sizes=(4, 8, 16), **kwargs):
    """``count`` random graded families cycling through ``sizes``."""
    return [
        random_graded(n=sizes[i % len(sizes)], seed=child, **kwargs)
        for i, child in enumerate(ensemble_seeds(seed, count))
    ]


def _pauli_x(n, i):
    """``X`` on qubit ``i`` of ``n`` (qubit 0 is the most significant bit)."""
    N = 2 ** n
    M = np.zeros((N, N), dtype=complex)
    bit = 1 << (n - 1 - i)
    for b in range(N):
        M[b ^ bit, b] = 1.0
    return M


def _z_values(n, i):
    bit = 1 << (n - 1 - i)
    return np.array([1.0 if (b & bit) == 0 else -1.0 for b in range(2 ** n)])


def transverse_chain(n=3, J=1.0, bias=0.3, field=1.0):
    """Open Ising chain annealed from a transverse field, graded on qubit 0.

    ``A(s) = -(1 - s) field sum_i X_i + s H_P`` with
    ``H_P = -J sum_i Z_i Z_{i+1} - sum_i b_i Z_i`` and ``b_i = bias (1 + i/(2n))``.
    ``S`` holds basis states with qubit 0 in ``|0>``, so the ``X_0`` term is the
    block-antidiagonal ``Delta``.
    """
    n = int(n)
    if not 1 <= n <= 4:
        raise ValueError(f"transverse-chain supports 1..4 qubits, got {n}")
    if n < 2:
        raise ValueError("transverse-chain needs at least 2 qubits for a graded block structure")
    N = 2 ** n
    diag = np.zeros(N)
    for i in range(n - 1):
        diag -= J * _z_values(n, i) * _z_values(n, i + 1)
    for i in range(n):
        diag -= bias * (1 + i / (2 * n)) * _z_values(n, i)
    HP = np.diag(diag).astype(complex)
    Xrest = sum(_pauli_x(n, i) for i in range(1, n))
    H = LinearSchedule(-field * Xrest, HP)
    D = LinearSchedule(-field * _pauli_x(n, 0), np.zeros((N, N), dtype=complex))
    g = Grading(N, range(N // 2))
    return GradedFamily(g, H, D, name=f"transverse-chain(n={n}, J={J:g}, bias={bias:g})")


def static(matrix, grading):
    """Constant family ``A`` split along ``grading``."""
    A = check_hermitian(np.asarray(matrix, dtype=complex))
    g = Grading(A.shape[0], grading)
    return GradedFamily.from_total(g, constant_schedule(A), name="static")


def diagonal_family(diag=(0.0, 1.0, 0.2, 1.2), grading=(0, 1)):
    """Static diagonal family (``Delta = 0``)."""
    return static(np.diag(np.asarray(diag, dtype=float)), grading)


def frustrated_triangle(a=1.0, grading=(0,)):
    """Static 3-level family with all off-diagonals ``+a``: an odd cycle of positive signs."""
    A = np.full((3, 3), float(a)) - float(a) * np.eye(3) + np.diag([0.0, 0.5, 1.0])
    return static(A, grading)


GENERATORS = {
    "double-well": double_well,
    "rotating-block": rotating_block,
    "random-graded": random_graded,
    "transverse-chain": transverse_chain,
    "static": static,
    "diagonal": diagonal_family,
    "frustrated-triangle": frustrated_triangle,
}


def build(name, params=None, seed=None):
    """Instantiate a builtin generator by name; ``seed`` fills in a missing ``seed`` param."""
    if name not in GENERATORS:
        raise KeyError(name)
    params = dict(params or {})
    if name == "random-graded" and "seed" not in params and seed is not None:
        params["seed"] = seed
    return GENERATORS[name](**params)
