"""Graded adiabatic bounds: spectral data, propagators and bound verification for ``A(s) = H(s) + Delta(s)``."""

__version__ = "0.1.0"

from ._validation import DEFAULT_TOL, Tolerances
from .bounds import (
    BoundReport,
    constants_B_C,
    lemma_checks,
    rhs_all,
    stoquastic_corollary,
    sweep_constants,
)
from .checks import Check
from .estimators import AdiabaticBoundEstimator, CheegerCut, SpectralProfile
from .exceptions import (
    AdiastabError,
    HermitianError,
    NotPSDError,
    GradingError,
    StructureError,
    DegenerateGroundStateError,
    NonRealCheegerError,
    GapCollapseError,
    PerturbationTooLargeError,
    ClusterCollisionError,
    InapplicableBoundError,
    StepBudgetError,
    CutSizeError,
    ConfigError,
)
from .generators import GENERATORS, build, double_well, random_graded, rotating_block
from .graded import GradedFamily, Grading, LinearSchedule, check_assumptions, family_from_json
from .propagators import epsilon_T, evolve, lhs_errors
from .resolvent import build_bundle
from .spectral import cheeger_ratio, snapshot
from .stoquastic import balance_and_gamma_tilde, min_cut
