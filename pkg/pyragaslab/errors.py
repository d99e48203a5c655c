"""Exception hierarchy.

Parameter problems are also ``ValueError``; numerical failures and
degenerate bifurcation points are also ``ArithmeticError``. The CLI maps the
first family to exit code 2 and the second to exit code 3.
"""

from __future__ import annotations


class LabError(Exception):
    """Base class for every error raised by pyragaslab."""


# ── Parameter / domain errors ────────────────────────────────────────────────

class DomainError(LabError, ValueError):
    """Argument outside the domain where the quantity is defined."""


class DenominatorZero(LabError, ValueError):
    """1 + K₂e^{iβ₂} (or another rearrangement denominator) vanishes."""


class BoundaryCase(LabError, ValueError):
    """A sign test sits on its zero set; no verdict can be given."""


# ── Numerical failures ───────────────────────────────────────────────────────

class SimplicityViolation(LabError, ArithmeticError):
    """The critical root is not simple: 1 + Kτe^{i(β−φ)} = 0 or similar."""


class DegenerateTransversality(LabError, ArithmeticError):
    """The transversality quantity vanishes, so μ₂ is undefined."""


class StepUnderflow(LabError, ArithmeticError):
    """Requested step below the 1e-12 floor."""


class UndefinedPhase(LabError, ArithmeticError):
    """Phase sampled where |z| < 1e-12."""


class BoundaryRoot(LabError, ArithmeticError):
    """A root sits on (or too close to) a counting contour."""


class NonIntegerWinding(LabError, ArithmeticError):
    """Contour integral not within 0.25 of an integer."""


class CountMismatch(LabError, ArithmeticError):
    """Newton-refined roots disagree with the argument-principle count."""


class ContinuationBreakdown(LabError, ArithmeticError):
    """Root continuation could not follow the branch."""
