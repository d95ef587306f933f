"""Exception types shared across the package."""


class WavetripleError(Exception):
    """Base class for all errors raised by this package."""


class MeshValidationError(WavetripleError):
    """Mesh is structurally inconsistent (indices, orientation, labels)."""


class CoefficientError(WavetripleError):
    """Coefficient field violates a bound or sign constraint."""


class DegenerateEnergyNormError(WavetripleError):
    """No clamped boundary and no boundary spring: the energy form has a kernel."""


class NotPositiveDefiniteError(WavetripleError):
    """Matrix handed to a Cholesky factorization is not positive definite."""


class SingularMatrixError(WavetripleError):
    """Matrix handed to an LU solve is singular to working precision."""


class EigenSolverError(WavetripleError):
    """Eigenvalue iteration failed to converge."""


class ContractionBreachError(WavetripleError):
    """Time stepping grew the state norm on a provably dissipative model."""


class ConfigError(WavetripleError):
    """Model configuration text is malformed; carries line-numbered diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(self.diagnostics))
