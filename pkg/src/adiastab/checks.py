"""Signed inequality records shared by the verification routines."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Check:
    """One inequality ``lhs <= rhs``; ``margin = rhs - lhs``.

    ``applicable=False`` marks a check whose hypotheses failed; it is
    reported but never counts as a violation.
    """

    name: str
    lhs: float
    rhs: float
    tol: float = 0.0
    applicable: bool = True
    s: float = None

    @property
    def margin(self):
        return float(self.rhs - self.lhs)

    @property
    def passed(self):
        if not self.applicable:
            return True
        if np.isnan(self.lhs) or np.isnan(self.rhs):
            return False
        return self.margin >= -self.tol

    def to_json(self):
        return {
            "name": self.name,
            "s": self.s,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "tol": self.tol,
            "applicable": self.applicable,
            "passed": self.passed,
        }


def failures(checks):
    return [c for c in checks if not c.passed]


def count(checks):
    checks = list(checks)
    return {
        "total": len(checks),
        "skipped": sum(not c.applicable for c in checks),
        "failed": sum(not c.passed for c in checks),
    }
