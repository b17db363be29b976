"""Exception hierarchy."""

from __future__ import annotations


class TrigMomentError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(TrigMomentError, ValueError):
    """Input data violates one or more shape rules.

    ``issues`` lists every violated rule, not just the first one found.
    """

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(self.issues))


class NotSolvableError(TrigMomentError):
    """The block Toeplitz matrix is not positive semidefinite."""


class InconsistentOperatorError(TrigMomentError):
    """The shift map x_k -> x_{k+N} is not a well-defined isometry numerically."""


class ContractivityError(TrigMomentError, ValueError):
    """A parameter value has operator norm above one.

    ``zeta`` is the probe point where the violation was found (None for
    constant parameters) and ``norm`` the offending singular value.
    """

    def __init__(self, message, zeta=None, norm=None):
        super().__init__(message)
        self.zeta = zeta
        self.norm = norm


class DefectSizeError(TrigMomentError, ValueError):
    """Parameter matrix size does not match the defect dimension."""

    def __init__(self, expected, got):
        super().__init__(f"expected δ={expected}, got {got}")
        self.expected = expected
        self.got = got
