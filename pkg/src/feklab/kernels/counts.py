"""Cost-model constants: global memory traffic and operation counts.

Global accesses per element follow directly from the input/output array
sizes: vertex coordinates and PDE coefficients are each read once, the
stiffness matrix and load vector are each written once.

Operation counts are model constants for compiler-optimized kernels, not
instruction counts of this implementation.  They decompose into phases:

* geometric shape-function derivatives: 9 ops per tetrahedron (edge
  vectors of the affine map), 126 ops per integration point for prisms;
* Jacobian terms (cofactor inverse, determinant, vol): 49 ops, once per
  tetrahedron, per point for prisms;
* global shape-function derivatives: 60 ops per tetrahedron, 90 ops per
  integration point for prisms (15 per function);
* final stiffness/load updates: everything else.

For tetrahedra all phases hoist out of the accumulation loops, so every
variant shares one total.  For prisms the phases sit inside the variant
loops: QSS repeats them per point, SQS per (row, point), SSQ per
(entry, point) with only the two needed shape functions derived (30
ops).  The final-update numbers are the published totals minus the
phase work; the SSQ tetra ConvDiff total (1623) is a verbatim model
constant whose breakdown is not separately specified.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..problems import KernelDescriptor, ProblemClass, Variant
from ..refelem import ElementType

_TET = ElementType.TETRAHEDRON
_PRISM = ElementType.PRISM
_POISSON = ProblemClass.POISSON
_CONVDIFF = ProblemClass.CONV_DIFF

# total floating-point operations per element
OP_TOTALS: dict[tuple[Variant, ElementType, ProblemClass], int] = {
    (Variant.QSS, _TET, _POISSON): 290,
    (Variant.QSS, _PRISM, _POISSON): 2700,
    (Variant.QSS, _TET, _CONVDIFF): 986,
    (Variant.QSS, _PRISM, _CONVDIFF): 4806,
    (Variant.SQS, _TET, _POISSON): 290,
    (Variant.SQS, _PRISM, _POISSON): 10416,
    (Variant.SQS, _TET, _CONVDIFF): 986,
    (Variant.SQS, _PRISM, _CONVDIFF): 12492,
    (Variant.SSQ, _TET, _POISSON): 290,
    (Variant.SSQ, _PRISM, _POISSON): 54876,
    (Variant.SSQ, _TET, _CONVDIFF): 1623,
    (Variant.SSQ, _PRISM, _CONVDIFF): 65232,
}

GEO_DERIV_OPS = {_TET: 9, _PRISM: 126}     # per element / per point
JACOBIAN_OPS = 49                          # per element / per point
SHAPE_DERIV_OPS = {_TET: 60, _PRISM: 90}   # all functions, per element / per point
SHAPE_DERIV_OPS_PER_FN = 15


def access_breakdown(
    element: ElementType, problem: ProblemClass
) -> tuple[int, int, int, int]:
    """(geometry reads, coefficient reads, stiffness writes, load writes)."""
    n_s = element.n_shape
    return (
        element.geometry_size,
        problem.coefficient_size(element),
        n_s * n_s,
        n_s,
    )


def global_accesses(element: ElementType, problem: ProblemClass) -> int:
    """Global memory accesses per element (identical for all variants)."""
    return sum(access_breakdown(element, problem))


@dataclass(frozen=True)
class PhaseOpCounts:
    geo_derivs: int
    jacobian_terms: int
    shape_derivs: int
    final_update: int
    total: int


def phase_op_counts(desc: KernelDescriptor) -> PhaseOpCounts:
    """Per-phase operation counts for a descriptor.

    Keyed on (variant, element, problem); the geometry-path flag does not
    change the model (the totals describe the natural path per element
    type).
    """
    element, problem, variant = desc.element, desc.problem, desc.variant
    total = OP_TOTALS[(variant, element, problem)]
    if element is _TET:
        geo = GEO_DERIV_OPS[_TET]
        jac = JACOBIAN_OPS
        shape = SHAPE_DERIV_OPS[_TET]
    else:
        n_q, n_s = element.n_quad, element.n_shape
        if variant is Variant.QSS:
            reps = n_q
            shape = SHAPE_DERIV_OPS[_PRISM] * reps
        elif variant is Variant.SQS:
            reps = n_s * n_q
            shape = SHAPE_DERIV_OPS[_PRISM] * reps
        else:
            reps = n_s * n_s * n_q
            shape = 2 * SHAPE_DERIV_OPS_PER_FN * reps
        geo = GEO_DERIV_OPS[_PRISM] * reps
        jac = JACOBIAN_OPS * reps
    return PhaseOpCounts(geo, jac, shape, total - geo - jac - shape, total)
