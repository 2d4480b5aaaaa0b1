"""Pydantic models for verification reports and run outputs."""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field

from fourier_mfg.models.enums import CheckStatus, DerivativeSource


class StandingAssumptionsReport(BaseModel):
    """Sampled evidence for the convexity and potential-structure hypotheses."""

    min_hessian_eigenvalue: float
    max_hessian_eigenvalue: float
    coupling_flat_derivative_gap: float
    terminal_flat_derivative_gap: float
    coupling_semiconcavity: float = Field(description="max translation quotient of F")
    terminal_semiconcavity: float = Field(description="max translation quotient of G")
    lagrangian_convexity: float = Field(description="fitted uniform convexity constant of L")
    gradient_bound: float
    control_bound: float


class HjbTerms(BaseModel):
    """Signed contributions to the generalized HJB expression."""

    time_derivative: float
    hamiltonian: float = Field(description="minus the Hamiltonian integral")
    laplacian: float = Field(description="minus the Laplacian pairing")
    potential: float = Field(description="F(m)")

    def signed_sum(self) -> float:
        return self.time_derivative + self.hamiltonian + self.laplacian + self.potential


class HjbResidualReport(BaseModel):
    """Generalized HJB residual at one probe."""

    t: float
    order: int
    resolution: int
    residual: float
    terms: HjbTerms
    derivative_source: DerivativeSource
    bound_c: float


class DerivativeBoundsReport(BaseModel):
    """The two quantities bounded uniformly in N for the value function."""

    t: float
    order: int
    sup_gradient: float
    weighted_sum: float


class MasterTerms(BaseModel):
    """Complex contributions (real, imag) to the weak master residual at one mode."""

    time_derivative: tuple[float, float]
    hamiltonian: tuple[float, float]
    laplacian: tuple[float, float]
    coupling: tuple[float, float]


class MasterResidualReport(BaseModel):
    """Weak master-equation residual for one mode k."""

    t: float
    index: tuple[int, ...]
    step: float
    real: float
    imag: float
    terms: MasterTerms

    @property
    def value(self) -> complex:
        return complex(self.real, self.imag)


class ResidualGradientReport(BaseModel):
    """Finite-difference d/dm^k of the scalar HJB residual with a truncation estimate."""

    index: tuple[int, ...]
    step: float
    real: float
    imag: float
    truncation_error: float

    @property
    def value(self) -> complex:
        return complex(self.real, self.imag)


class SymmetryReport(BaseModel):
    """Cross derivatives d_{m^j} Z^k and d_{m^k} Z^j."""

    first: tuple[int, ...]
    second: tuple[int, ...]
    forward: tuple[float, float]
    backward: tuple[float, float]
    relative_gap: float


class LipschitzTestReport(BaseModel):
    """Monte-Carlo weak one-sided Lipschitz test."""

    lhs: float
    rhs_bound: float
    standard_error: float
    n_mc: int
    status: CheckStatus


class CheckResult(BaseModel):
    """One acceptance check."""

    name: str
    status: CheckStatus
    detail: str = ""
    seconds: float = 0.0


class SuiteSummary(BaseModel):
    """Outcome of the acceptance battery."""

    checks: list[CheckResult]
    passed: int
    failed: int

    @property
    def ok(self) -> bool:
        return self.failed == 0


class RunSummary(BaseModel):
    """Summary written next to every CLI run."""

    subcommand: str
    name: str
    status: str = "ok"
    outputs: list[str] = Field(default_factory=list)
    metrics: dict[str, Any] = Field(default_factory=dict)
