"""Exception hierarchy for Fourier MFG."""

from __future__ import annotations

from typing import Any


class FourierMfgError(Exception):
    """Base exception for Fourier MFG errors."""

    pass


class ConfigError(FourierMfgError, ValueError):
    """Invalid run configuration or unsupported problem shape."""

    pass


class DimensionMismatchError(FourierMfgError, ValueError):
    """Operands live on different tori or index sets."""

    def __init__(self, message: str, expected: Any = None, actual: Any = None):
        super().__init__(message)
        self.expected = expected
        self.actual = actual


class ResolutionError(FourierMfgError, ValueError):
    """Grid resolution cannot represent the requested trigonometric polynomial."""

    def __init__(self, resolution: int, order: int):
        super().__init__(f"Resolution {resolution} is below the Nyquist bound 2N={2 * order}")
        self.resolution = resolution
        self.order = order


class LegendreConvergenceError(FourierMfgError):
    """Legendre maximization did not converge."""

    def __init__(self, message: str, best_value: float, maximizer: Any = None):
        super().__init__(f"{message} (best value {best_value:.6g})")
        self.best_value = best_value
        self.maximizer = maximizer


class CflViolationError(FourierMfgError):
    """Forward solve produced a negative density; the time step is too large."""

    def __init__(self, step: int, time: float, min_density: float):
        super().__init__(
            f"Density became negative ({min_density:.3e}) at step {step} (t={time:.4f}); reduce dt (increase steps)"
        )
        self.step = step
        self.time = time
        self.min_density = min_density


class BlowUpError(FourierMfgError):
    """Backward solve exceeded the configured sup-norm bound."""

    def __init__(self, step: int, time: float, sup_norm: float):
        super().__init__(f"Value function blew up (sup {sup_norm:.3e}) at step {step} (t={time:.4f})")
        self.step = step
        self.time = time
        self.sup_norm = sup_norm


class MfgConvergenceError(FourierMfgError):
    """Damped fixed-point iteration did not reach tolerance."""

    def __init__(self, iterations: int, residual: float, last_iterate: Any = None):
        super().__init__(
            f"MFG fixed point not reached after {iterations} iterations (residual {residual:.3e}); try smaller damping"
        )
        self.iterations = iterations
        self.residual = residual
        self.last_iterate = last_iterate


class ValueComputationError(FourierMfgError):
    """No multi-start candidate converged."""

    def __init__(self, message: str, failures: list[str] | None = None):
        super().__init__(message)
        self.failures = failures or []


class PreconditionError(FourierMfgError):
    """Measure violates a required bound."""

    def __init__(self, bound: str, observed: float, required: float):
        super().__init__(f"Precondition '{bound}' violated: observed {observed:.6g}, required {required:.6g}")
        self.bound = bound
        self.observed = observed
        self.required = required


class PerturbationExitError(FourierMfgError):
    """Finite-difference perturbation leaves the positive cone even at the smallest step."""

    def __init__(self, index: tuple[int, ...], step: float):
        super().__init__(f"Perturbation of mode {index} exits O_N at minimal step {step:.3e}")
        self.index = index
        self.step = step


class SamplerAcceptanceError(FourierMfgError):
    """Rejection sampler acceptance collapsed."""

    def __init__(self, acceptance_rate: float, proposals: int):
        super().__init__(
            f"Acceptance rate {acceptance_rate:.2e} after {proposals} proposals is too low; check the decay exponent p"
        )
        self.acceptance_rate = acceptance_rate
        self.proposals = proposals


class MollifierRadiusError(FourierMfgError, ValueError):
    """Mollifier support radius exceeds the regularization threshold."""

    def __init__(self, radius: float, threshold: float):
        super().__init__(f"Mollifier radius {radius:.3e} exceeds the threshold {threshold:.3e}")
        self.radius = radius
        self.threshold = threshold


class MollificationInvariantError(FourierMfgError):
    """A mollified argument failed positivity. This is a bug, not a user error."""

    def __init__(self, sample_index: int, min_density: float):
        super().__init__(f"Mollified sample {sample_index} has non-positive density {min_density:.3e}")
        self.sample_index = sample_index
        self.min_density = min_density


class FlowExitError(FourierMfgError):
    """Characteristic flow left O_N."""

    def __init__(self, exit_time: float, margin: float):
        super().__init__(f"Flow left O_N at t={exit_time:.4f} (margin {margin:.3e}); increase N")
        self.exit_time = exit_time
        self.margin = margin
