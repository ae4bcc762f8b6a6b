"""Exception hierarchy for adiastab."""


class AdiastabError(Exception):
    """Base class for every error raised by this package."""


class HermitianError(AdiastabError, ValueError):
    """Input matrix is not Hermitian within tolerance."""

    def __init__(self, max_asymmetry, tol):
        self.max_asymmetry = float(max_asymmetry)
        self.tol = float(tol)
        super().__init__(
            f"matrix is not Hermitian: max |A_ij - conj(A_ji)| = "
            f"{self.max_asymmetry:.3e} exceeds tolerance {self.tol:.3e}"
        )


class NotPSDError(AdiastabError, ValueError):
    """Matrix has an eigenvalue below -tol."""


class GradingError(AdiastabError, ValueError):
    """Invalid index bipartition."""


class StructureError(AdiastabError, ValueError):
    """H is not block diagonal or Delta is not block antidiagonal."""

    def __init__(self, which, norm, tol):
        self.which = which
        self.norm = float(norm)
        super().__init__(f"block structure violated: {which} = {norm:.3e} > {tol:.3e}")


class DegenerateGroundStateError(AdiastabError):
    """Global ground state of A(s) is degenerate, so the Cheeger ratio is ambiguous."""


class NonRealCheegerError(AdiastabError):
    """The Cheeger numerator has a non-negligible imaginary part."""


class GapCollapseError(AdiastabError):
    """A local spectral gap vanished where a reduced resolvent is needed."""


class PerturbationTooLargeError(AdiastabError):
    """eta <= 0: the projected perturbation exceeds the smallest local gap."""


class ClusterCollisionError(AdiastabError):
    """ker(H' - mu) is larger than span(P_mu, P_mubar)."""


class InapplicableBoundError(AdiastabError):
    """A bound's hypotheses fail (e.g. c >= 1)."""


class StepBudgetError(AdiastabError, RuntimeError):
    """The adaptive integrator exceeded its step budget."""


class CutSizeError(AdiastabError, ValueError):
    """Exhaustive cut enumeration requested above the size limit."""


class ConfigError(AdiastabError, ValueError):
    """Experiment configuration is malformed."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
