"""
Geometry Errors Module
Exception types raised by the model, Heisenberg, chart and triangle code.
"""

from typing import Optional, Sequence


class GeometryError(ValueError):
    """Base class for violated geometric preconditions."""


class ModelMismatchError(GeometryError):
    """Points or vectors taken from different model spaces."""


class RepresentationError(GeometryError):
    """A homogeneous vector does not represent the kind of point required."""


class NormalizationError(GeometryError):
    """A tangent vector is not unit length or not tangent at its base point."""


class DegenerateGeodesicError(GeometryError):
    """Endpoints coincide, so no geodesic (or direction) is determined."""


class CenterCollisionError(GeometryError):
    """An ideal point coincides with the center of a Busemann chart."""


class PreconditionError(GeometryError):
    """Any other violated precondition."""


class DomainError(PreconditionError):
    """Argument outside the admissible domain (eigenvalue, dilation factor)."""


class DimensionMismatchError(PreconditionError):
    """Heisenberg elements of different dimension."""


class ChartError(GeometryError):
    """Heisenberg coordinates cannot be recovered from an ambient vector."""


class ConstraintViolationError(GeometryError):
    """A path breaks the horizontality constraint."""

    def __init__(self, message: str, worst_step: int, defect: float):
        super().__init__(f"{message} (worst step {worst_step}, defect {defect:.3e})")
        self.worst_step = worst_step
        self.defect = defect


class ConvergenceError(RuntimeError):
    """A limit evaluation or an optimizer failed to converge."""

    def __init__(self, message: str,
                 last_values: Optional[Sequence[float]] = None,
                 residual: Optional[float] = None):
        details = []
        if last_values is not None:
            details.append("last values " + ", ".join(f"{v:.12g}" for v in last_values))
        if residual is not None:
            details.append(f"residual {residual:.3e}")
        super().__init__(message + (f" ({'; '.join(details)})" if details else ""))
        self.message = message
        self.last_values = tuple(last_values) if last_values is not None else ()
        self.residual = residual


class ConfigurationError(ValueError):
    """Invalid command line or TOML configuration."""


class BracketError(ConvergenceError):
    """A scalar root could not be bracketed on the admissible interval."""
