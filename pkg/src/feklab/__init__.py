"""Finite-element numerical-integration kernel lab.

Element stiffness-matrix / load-vector integration for first-order
tetrahedra and prisms in all loop-ordering variants (QSS, SQS, SSQ) and
geometry paths (element-constant vs per-point Jacobians), with batch
storage-layout handling, instrumented memory traffic, and a roofline
execution-time model.
"""

from .geometry import ElementGeometry, JacobianData
from .kernels import integrate_batch, integrate_element, phase_op_counts
from .layout import BatchLayout, ElementBatch, LayoutKind, build_batch, convert, extract
from .perfmodel import (
    BUILTIN_PROFILES,
    KernelCost,
    ProcessorProfile,
    efficiency,
    kernel_cost,
    limiting_intensity,
    memory_requirements,
    time_bound,
)
from .problems import (
    CoefficientSet,
    ElementMatrix,
    GeometryPath,
    KernelDescriptor,
    ProblemClass,
    Variant,
)
from .refelem import ElementType, QuadratureRule, ShapeFunctionTable, reference_element

__version__ = "0.1.0"

__all__ = [
    "BatchLayout",
    "BUILTIN_PROFILES",
    "CoefficientSet",
    "ElementBatch",
    "ElementGeometry",
    "ElementMatrix",
    "ElementType",
    "GeometryPath",
    "JacobianData",
    "KernelCost",
    "KernelDescriptor",
    "LayoutKind",
    "ProblemClass",
    "ProcessorProfile",
    "QuadratureRule",
    "ShapeFunctionTable",
    "Variant",
    "build_batch",
    "convert",
    "efficiency",
    "extract",
    "integrate_batch",
    "integrate_element",
    "kernel_cost",
    "limiting_intensity",
    "memory_requirements",
    "phase_op_counts",
    "reference_element",
    "time_bound",
]
