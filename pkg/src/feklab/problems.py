"""Problem classes, PDE coefficient sets and kernel descriptors.

Coefficient index convention: slot 0 is the function-value slot, slots
1..3 are the x/y/z-derivative slots.  A weak-form term with coefficient
c[i][j] pairs the i-slot of the test function with the j-slot of the
trial function; d[i] pairs with the i-slot of the test function on the
right-hand side.

* Poisson: identity diffusion (c[i][j] = delta_ij on derivative slots,
  nothing else), plus one right-hand-side value per quadrature point --
  the per-element coefficient input is just those n_quad values.
* ConvDiff: the full constant-per-element set c (4x4) and d (4),
  20 reals per element.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .refelem import ElementType


class ProblemClass(Enum):
    POISSON = "poisson"
    CONV_DIFF = "convdiff"

    def coefficient_size(self, etype: ElementType) -> int:
        """Per-element scalar count of the coefficient input."""
        return etype.n_quad if self is ProblemClass.POISSON else 20


class Variant(Enum):
    """Nesting order of the final accumulation loops.

    QSS: quadrature point outermost, then matrix row, then column.
    SQS: matrix row outermost, quadrature point in the middle.
    SSQ: matrix entry (row, column) outermost, quadrature point innermost.
    """

    QSS = "qss"
    SQS = "sqs"
    SSQ = "ssq"


class GeometryPath(Enum):
    """Jacobian handling: hoisted once per element vs. per quadrature point."""

    GEO_LINEAR = "linear"
    GEO_GENERIC = "generic"


@dataclass(frozen=True)
class KernelDescriptor:
    """Identifies one concrete kernel: variant x geometry path x problem x element."""

    variant: Variant
    geometry_path: GeometryPath
    problem: ProblemClass
    element: ElementType

    def __post_init__(self):
        if (
            self.geometry_path is GeometryPath.GEO_LINEAR
            and self.element is not ElementType.TETRAHEDRON
        ):
            raise ValueError("the element-constant Jacobian path requires tetrahedra")

    def short_name(self) -> str:
        return (
            f"{self.variant.value}_{self.geometry_path.value}"
            f"_{self.element.value}_{self.problem.value}"
        )


def natural_path(element: ElementType) -> GeometryPath:
    """The geometry path an element type would normally use."""
    if element is ElementType.TETRAHEDRON:
        return GeometryPath.GEO_LINEAR
    return GeometryPath.GEO_GENERIC


def case_descriptors(element: ElementType, problem: ProblemClass):
    """All valid descriptors for one (element, problem) case.

    Six for tetrahedra (three variants x two geometry paths), three for
    prisms (generic path only).
    """
    paths = (
        (GeometryPath.GEO_LINEAR, GeometryPath.GEO_GENERIC)
        if element is ElementType.TETRAHEDRON
        else (GeometryPath.GEO_GENERIC,)
    )
    return tuple(
        KernelDescriptor(v, p, problem, element) for v in Variant for p in paths
    )


def all_descriptors():
    """Every valid descriptor (18 in total)."""
    out = []
    for element in ElementType:
        for problem in ProblemClass:
            out.extend(case_descriptors(element, problem))
    return tuple(out)


@dataclass(frozen=True)
class CoefficientSet:
    """PDE coefficients for one element.

    Poisson holds ``d0`` (one right-hand-side value per quadrature
    point); ConvDiff holds ``c`` (4x4) and ``d`` (4).
    """

    problem: ProblemClass
    d0: np.ndarray | None = None
    c: np.ndarray | None = None
    d: np.ndarray | None = None

    @classmethod
    def poisson(cls, d0) -> "CoefficientSet":
        d0 = np.ascontiguousarray(d0, dtype=float)
        return cls(ProblemClass.POISSON, d0=d0)

    @classmethod
    def convdiff(cls, c, d) -> "CoefficientSet":
        c = np.ascontiguousarray(c, dtype=float)
        d = np.ascontiguousarray(d, dtype=float)
        if c.shape != (4, 4) or d.shape != (4,):
            raise ValueError(f"expected c (4,4) and d (4,), got {c.shape}, {d.shape}")
        return cls(ProblemClass.CONV_DIFF, c=c, d=d)

    def flat(self) -> np.ndarray:
        """Flat per-element coefficient row (the batch storage format)."""
        if self.problem is ProblemClass.POISSON:
            return np.asarray(self.d0, dtype=float)
        return np.concatenate([self.c.ravel(), self.d])

    @classmethod
    def from_flat(
        cls, problem: ProblemClass, etype: ElementType, flat
    ) -> "CoefficientSet":
        flat = np.asarray(flat, dtype=float)
        size = problem.coefficient_size(etype)
        if flat.shape != (size,):
            raise ValueError(f"expected {size} coefficients, got {flat.shape}")
        if problem is ProblemClass.POISSON:
            return cls.poisson(flat)
        return cls.convdiff(flat[:16].reshape(4, 4), flat[16:])


@dataclass(frozen=True)
class ElementMatrix:
    """One element's stiffness matrix and load vector."""

    A: np.ndarray  # (n_shape, n_shape)
    b: np.ndarray  # (n_shape,)
