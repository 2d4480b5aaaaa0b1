"""Enumeration types for Fourier MFG."""

from __future__ import annotations

from enum import StrEnum


class HamiltonianKind(StrEnum):
    """Catalog of supported Hamiltonians."""

    QUADRATIC = "quadratic"
    RELATIVISTIC = "relativistic"


class MembershipStatus(StrEnum):
    """Outcome of a certified positivity test."""

    INSIDE = "inside"
    OUTSIDE = "outside"
    INCONCLUSIVE = "inconclusive"


class DerivativeSource(StrEnum):
    """How coefficient derivatives of the value function were obtained."""

    SUPERJET = "superjet"
    FINITE_DIFFERENCE = "finite_difference"


class FieldKind(StrEnum):
    """Coefficient fields usable as mollified potentials."""

    ZERO = "zero"
    POTENTIAL = "potential"
    LINEARIZED = "linearized"
    VALUE = "value"

    @property
    def label(self) -> str:
        """Human-readable label for the field."""
        labels = {
            FieldKind.ZERO: "identically zero",
            FieldKind.POTENTIAL: "flat derivative of the running coupling",
            FieldKind.LINEARIZED: "value superjet linearized at the probe",
            FieldKind.VALUE: "value superjet re-solved per measure",
        }
        return labels[self]


class CheckStatus(StrEnum):
    """Status of a numerical verification."""

    PASSED = "passed"
    FAILED = "failed"
    INCONCLUSIVE = "inconclusive"
    ERROR = "error"
