"""Exception types shared across the package."""


class FeklabError(Exception):
    """Base class for all package-specific errors."""


class GeometryError(FeklabError):
    """Base class for invalid element geometry."""

    def __init__(self, message, element_index=None, point_index=None):
        self.element_index = element_index
        self.point_index = point_index
        parts = [message]
        if element_index is not None:
            parts.append(f"element {element_index}")
        if point_index is not None:
            parts.append(f"quadrature point {point_index}")
        super().__init__(" @ ".join(parts))


class DegenerateElement(GeometryError):
    """Mapping Jacobian determinant is zero up to the scale-relative tolerance."""


class InvertedElement(GeometryError):
    """Mapping Jacobian determinant is negative (element orientation flipped)."""


class ShapeMismatch(FeklabError):
    """Geometry/coefficient data does not match the kernel descriptor."""


class HeterogeneousBatch(FeklabError):
    """Batch construction received elements of mixed type or problem class."""


class CounterMismatch(FeklabError):
    """Instrumented memory-access counters disagree with the cost model."""
