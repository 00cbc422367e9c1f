"""Per-element integration kernels, one function per loop-ordering variant.

The final accumulation runs over (quadrature point q, matrix row r,
matrix column s); the three variants nest these loops differently:

* QSS -- q outermost: Jacobian terms and all global derivatives are
  computed once per point, then the full matrix is updated.
* SQS -- r outermost, q in the middle: one matrix row is accumulated at
  a time; the generic path recomputes point data for every row.
* SSQ -- (r, s) outermost, q innermost: one matrix entry is finished at
  a time; the generic path recomputes Jacobian terms per (r, s, q) and
  only derives the two shape functions it needs.

The ``geo_linear`` family hoists the (element-constant) Jacobian and the
global derivatives out of all loops and is valid for tetrahedra only;
``geo_generic`` recomputes them at the variant-specific place and works
for any supported element.

Problem-specific arithmetic (which coefficient slots pair with which
basis slots) is delegated to small update objects so the loop skeletons
stay problem independent.  Basis data at a point is handled as a 4 x
n_shape array ``phi`` whose row 0 holds function values and rows 1..3
the global derivative components.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatch
from ..geometry import (
    ElementGeometry,
    global_derivatives,
    jacobian_affine,
    jacobian_at_point,
)
from ..problems import (
    CoefficientSet,
    ElementMatrix,
    GeometryPath,
    KernelDescriptor,
    ProblemClass,
    Variant,
)
from ..refelem import reference_element


class _PoissonUpdate:
    """Identity diffusion; per-point right-hand-side values."""

    def __init__(self, coeff: CoefficientSet):
        self.d0 = coeff.d0

    @staticmethod
    def a_term(phi_r, phi_s) -> float:
        return phi_r[1] * phi_s[1] + phi_r[2] * phi_s[2] + phi_r[3] * phi_s[3]

    def b_term(self, phi_r, q: int) -> float:
        return self.d0[q] * phi_r[0]


class _ConvDiffUpdate:
    """Full constant-per-element coefficient set."""

    def __init__(self, coeff: CoefficientSet):
        self.c = coeff.c
        self.d = coeff.d

    def a_term(self, phi_r, phi_s) -> float:
        c = self.c
        acc = 0.0
        for i in range(4):
            ci = c[i]
            pr = phi_r[i]
            acc += pr * (
                ci[0] * phi_s[0] + ci[1] * phi_s[1] + ci[2] * phi_s[2] + ci[3] * phi_s[3]
            )
        return acc

    def b_term(self, phi_r, q: int) -> float:
        d = self.d
        return d[0] * phi_r[0] + d[1] * phi_r[1] + d[2] * phi_r[2] + d[3] * phi_r[3]


def _updates_for(coeff: CoefficientSet):
    if coeff.problem is ProblemClass.POISSON:
        return _PoissonUpdate(coeff)
    return _ConvDiffUpdate(coeff)


def _phi_matrix(values_q: np.ndarray, gdx: np.ndarray) -> np.ndarray:
    phi = np.empty((4, len(values_q)))
    phi[0] = values_q
    phi[1:] = gdx.T
    return phi


def qss_geo_generic(geom, coeff, rule, table) -> ElementMatrix:
    n_q, n_s = len(rule.weights), table.values.shape[1]
    upd = _updates_for(coeff)
    A = np.zeros((n_s, n_s))
    b = np.zeros(n_s)
    for q in range(n_q):
        jac = jacobian_at_point(geom, q, rule, table)
        vol = jac.vol
        phi = _phi_matrix(table.values[q], global_derivatives(jac, table.local_derivatives[q]))
        for r in range(n_s):
            phi_r = phi[:, r]
            for s in range(n_s):
                A[r, s] += vol * upd.a_term(phi_r, phi[:, s])
            b[r] += vol * upd.b_term(phi_r, q)
    return ElementMatrix(A, b)


def qss_geo_linear(geom, coeff, rule, table) -> ElementMatrix:
    n_q, n_s = len(rule.weights), table.values.shape[1]
    upd = _updates_for(coeff)
    jac = jacobian_affine(geom, rule)
    gdx = global_derivatives(jac, table.local_derivatives[0])
    A = np.zeros((n_s, n_s))
    b = np.zeros(n_s)
    for q in range(n_q):
        vol = jac.vol[q]
        phi = _phi_matrix(table.values[q], gdx)
        for r in range(n_s):
            phi_r = phi[:, r]
            for s in range(n_s):
                A[r, s] += vol * upd.a_term(phi_r, phi[:, s])
            b[r] += vol * upd.b_term(phi_r, q)
    return ElementMatrix(A, b)


def sqs_geo_generic(geom, coeff, rule, table) -> ElementMatrix:
    n_q, n_s = len(rule.weights), table.values.shape[1]
    upd = _updates_for(coeff)
    A = np.zeros((n_s, n_s))
    b = np.zeros(n_s)
    for r in range(n_s):
        for q in range(n_q):
            jac = jacobian_at_point(geom, q, rule, table)
            vol = jac.vol
            phi = _phi_matrix(
                table.values[q], global_derivatives(jac, table.local_derivatives[q])
            )
            phi_r = phi[:, r]
            for s in range(n_s):
                A[r, s] += vol * upd.a_term(phi_r, phi[:, s])
            b[r] += vol * upd.b_term(phi_r, q)
    return ElementMatrix(A, b)


def sqs_geo_linear(geom, coeff, rule, table) -> ElementMatrix:
    n_q, n_s = len(rule.weights), table.values.shape[1]
    upd = _updates_for(coeff)
    jac = jacobian_affine(geom, rule)
    gdx = global_derivatives(jac, table.local_derivatives[0])
    A = np.zeros((n_s, n_s))
    b = np.zeros(n_s)
    for r in range(n_s):
        for q in range(n_q):
            vol = jac.vol[q]
            phi = _phi_matrix(table.values[q], gdx)
            phi_r = phi[:, r]
            for s in range(n_s):
                A[r, s] += vol * upd.a_term(phi_r, phi[:, s])
            b[r] += vol * upd.b_term(phi_r, q)
    return ElementMatrix(A, b)


def _phi_one(values_q: np.ndarray, local_q: np.ndarray, dxi_dx: np.ndarray, s: int):
    ld = local_q[s]
    return np.array(
        [
            values_q[s],
            ld[0] * dxi_dx[0, 0] + ld[1] * dxi_dx[1, 0] + ld[2] * dxi_dx[2, 0],
            ld[0] * dxi_dx[0, 1] + ld[1] * dxi_dx[1, 1] + ld[2] * dxi_dx[2, 1],
            ld[0] * dxi_dx[0, 2] + ld[1] * dxi_dx[1, 2] + ld[2] * dxi_dx[2, 2],
        ]
    )


def ssq_geo_generic(geom, coeff, rule, table) -> ElementMatrix:
    n_q, n_s = len(rule.weights), table.values.shape[1]
    upd = _updates_for(coeff)
    A = np.zeros((n_s, n_s))
    b = np.zeros(n_s)
    for r in range(n_s):
        for s in range(n_s):
            acc_a = 0.0
            acc_b = 0.0
            for q in range(n_q):
                jac = jacobian_at_point(geom, q, rule, table)
                vol = jac.vol
                phi_r = _phi_one(table.values[q], table.local_derivatives[q], jac.dxi_dx, r)
                phi_s = (
                    phi_r
                    if s == r
                    else _phi_one(table.values[q], table.local_derivatives[q], jac.dxi_dx, s)
                )
                acc_a += vol * upd.a_term(phi_r, phi_s)
                if r == s:
                    acc_b += vol * upd.b_term(phi_r, q)
            A[r, s] = acc_a
            if r == s:
                b[r] = acc_b
    return ElementMatrix(A, b)


def ssq_geo_linear(geom, coeff, rule, table) -> ElementMatrix:
    n_q, n_s = len(rule.weights), table.values.shape[1]
    upd = _updates_for(coeff)
    jac = jacobian_affine(geom, rule)
    gdx = global_derivatives(jac, table.local_derivatives[0])
    A = np.zeros((n_s, n_s))
    b = np.zeros(n_s)
    for r in range(n_s):
        for s in range(n_s):
            acc_a = 0.0
            acc_b = 0.0
            for q in range(n_q):
                vol = jac.vol[q]
                phi = _phi_matrix(table.values[q], gdx)
                acc_a += vol * upd.a_term(phi[:, r], phi[:, s])
                if r == s:
                    acc_b += vol * upd.b_term(phi[:, r], q)
            A[r, s] = acc_a
            if r == s:
                b[r] = acc_b
    return ElementMatrix(A, b)


_KERNELS = {
    (Variant.QSS, GeometryPath.GEO_GENERIC): qss_geo_generic,
    (Variant.QSS, GeometryPath.GEO_LINEAR): qss_geo_linear,
    (Variant.SQS, GeometryPath.GEO_GENERIC): sqs_geo_generic,
    (Variant.SQS, GeometryPath.GEO_LINEAR): sqs_geo_linear,
    (Variant.SSQ, GeometryPath.GEO_GENERIC): ssq_geo_generic,
    (Variant.SSQ, GeometryPath.GEO_LINEAR): ssq_geo_linear,
}


def integrate_element(
    desc: KernelDescriptor, geom: ElementGeometry, coeff: CoefficientSet
) -> ElementMatrix:
    """Integrate one element with the kernel named by ``desc``.

    Raises ShapeMismatch when geometry or coefficients disagree with the
    descriptor, and propagates geometry errors.
    """
    if geom.element is not desc.element:
        raise ShapeMismatch(
            f"descriptor expects {desc.element.value}, geometry is {geom.element.value}"
        )
    if coeff.problem is not desc.problem:
        raise ShapeMismatch(
            f"descriptor expects {desc.problem.value}, coefficients are "
            f"{coeff.problem.value}"
        )
    if coeff.problem is ProblemClass.POISSON and len(coeff.d0) != desc.element.n_quad:
        raise ShapeMismatch(
            f"expected {desc.element.n_quad} right-hand-side values, got {len(coeff.d0)}"
        )
    rule, table = reference_element(desc.element)
    return _KERNELS[(desc.variant, desc.geometry_path)](geom, coeff, rule, table)
