"""Independent correctness references for the integration kernels.

``integrate_reference`` is a deliberately naive generic integrator:
three separate passes over the quadrature points (Jacobian terms and
global derivatives, then coefficient materialization, then a five-deep
final accumulation loop), with no hoisting and no problem
specialization.  ``integrate_high_order`` integrates the same weak-form
terms with refined quadrature, which is the only way to check prisms
whose Jacobian makes the integrand non-polynomial.  ``simplex_exact``
gives closed-form barycentric monomial integrals on affine tetrahedra.

These functions trade speed for obviousness; never call them from the
production kernels.
"""

from __future__ import annotations

from math import factorial

import numpy as np

from .geometry import ElementGeometry, adjugate_3x3, invert_3x3, _check_det
from .problems import CoefficientSet, ElementMatrix, ProblemClass
from .refelem import ElementType, reference_element, shape_at


def materialize_coefficients(
    coeff: CoefficientSet, n_quad: int
) -> tuple[np.ndarray, np.ndarray]:
    """Expand a coefficient set to dense per-point arrays c[i][j][q], d[i][q].

    Poisson fills the identity on the derivative slots and routes its
    per-point right-hand-side values into d[0]; ConvDiff broadcasts the
    element constants to every point.
    """
    c = np.zeros((4, 4, n_quad))
    d = np.zeros((4, n_quad))
    if coeff.problem is ProblemClass.POISSON:
        for i in (1, 2, 3):
            c[i, i, :] = 1.0
        d[0, :] = coeff.d0
    else:
        c[:, :, :] = coeff.c[:, :, None]
        d[:, :] = coeff.d[:, None]
    return c, d


def integrate_reference(geom: ElementGeometry, coeff: CoefficientSet) -> ElementMatrix:
    """Generic reference integrator for one element (any type, any problem).

    Structure: per-point Jacobian terms and global shape derivatives
    first, then actual coefficients at the points, then the final
    accumulation in loops ordered (point, row, column, test slot, trial
    slot).  Raises the usual geometry errors for degenerate or inverted
    mappings.
    """
    etype = geom.element
    rule, table = reference_element(etype)
    n_q, n_s = etype.n_quad, etype.n_shape

    vol = np.zeros(n_q)
    phi = np.zeros((4, n_s, n_q))  # slot 0 value, slots 1..3 global derivatives
    for q in range(n_q):
        dx_dxi = geom.coords.T @ table.local_derivatives[q]
        adj, det = adjugate_3x3(dx_dxi)
        _check_det(det, geom.bounding_box_scale(), point_index=q)
        dxi_dx = adj / det
        vol[q] = det * rule.weights[q]
        for s in range(n_s):
            phi[0, s, q] = table.values[q, s]
            for i in range(3):
                phi[1 + i, s, q] = (
                    table.local_derivatives[q, s, 0] * dxi_dx[0, i]
                    + table.local_derivatives[q, s, 1] * dxi_dx[1, i]
                    + table.local_derivatives[q, s, 2] * dxi_dx[2, i]
                )

    c, d = materialize_coefficients(coeff, n_q)

    A = np.zeros((n_s, n_s))
    b = np.zeros(n_s)
    for q in range(n_q):
        for r in range(n_s):
            for s in range(n_s):
                for i_d in range(4):
                    for j_d in range(4):
                        A[r, s] += (
                            vol[q] * c[i_d, j_d, q] * phi[i_d, r, q] * phi[j_d, s, q]
                        )
            for i_d in range(4):
                b[r] += vol[q] * d[i_d, q] * phi[i_d, r, q]
    return ElementMatrix(A, b)


def _gauss_01(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _triangle_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    # Duffy-collapsed Gauss grid: (u, v) -> (u, v(1-u)), jacobian (1-u);
    # n points per axis integrate triangle polynomials of degree 2n-2.
    x, w = _gauss_01(n)
    pts, ws = [], []
    for xi, wi in zip(x, w):
        for xj, wj in zip(x, w):
            pts.append((xi, xj * (1.0 - xi)))
            ws.append(wi * wj * (1.0 - xi))
    return np.array(pts), np.array(ws)


def _tet_rule_high(n: int) -> tuple[np.ndarray, np.ndarray]:
    # Duffy transform of the cube onto the simplex
    x, w = _gauss_01(n)
    pts, ws = [], []
    for x1, w1 in zip(x, w):
        for x2, w2 in zip(x, w):
            for x3, w3 in zip(x, w):
                pts.append((x1, x2 * (1.0 - x1), x3 * (1.0 - x1) * (1.0 - x2)))
                ws.append(w1 * w2 * w3 * (1.0 - x1) ** 2 * (1.0 - x2))
    return np.array(pts), np.array(ws)


def _prism_rule_high(level: int) -> tuple[np.ndarray, np.ndarray]:
    # triangle rule raised to degree 2*level tensored with (level+1)-point Gauss
    tp, tw = _triangle_rule(level + 1)
    z, zw = np.polynomial.legendre.leggauss(level + 1)
    pts = [(x, y, zi) for (x, y) in tp for zi in z]
    ws = [a * b for a in tw for b in zw]
    return np.array(pts), np.array(ws)


def high_order_rule(etype: ElementType, level: int):
    """Refined quadrature for ``etype``; exactness grows with ``level``."""
    if level < 1:
        raise ValueError("refinement level must be >= 1")
    if etype is ElementType.TETRAHEDRON:
        return _tet_rule_high(level + 2)
    return _prism_rule_high(level)


def integrate_high_order(
    geom: ElementGeometry, coeff: CoefficientSet, level: int
) -> ElementMatrix:
    """Integrate with a refined rule (degree >= 2*level).

    Poisson right-hand-side data is defined as point samples on the
    production rule, which a different rule cannot re-sample; it is
    therefore accepted only when constant across points (the constant is
    then used everywhere).  ConvDiff coefficients are element constants
    and need no care.
    """
    etype = geom.element
    n_s = etype.n_shape
    pts, ws = high_order_rule(etype, level)

    if coeff.problem is ProblemClass.POISSON:
        d0 = np.asarray(coeff.d0, dtype=float)
        if not np.all(d0 == d0[0]):
            raise ValueError(
                "refined-rule integration needs a constant right-hand side "
                "(per-point samples cannot be re-sampled)"
            )
        c_el = np.zeros((4, 4))
        for i in (1, 2, 3):
            c_el[i, i] = 1.0
        d_el = np.zeros(4)
        d_el[0] = d0[0]
    else:
        c_el, d_el = coeff.c, coeff.d

    A = np.zeros((n_s, n_s))
    b = np.zeros(n_s)
    for point, w in zip(pts, ws):
        values, local = shape_at(etype, point)
        dx_dxi = geom.coords.T @ local
        dxi_dx, det = invert_3x3(dx_dxi)
        gdx = local @ dxi_dx
        phi = np.vstack([values, gdx.T])  # (4, n_s)
        A += (det * w) * (phi.T @ c_el @ phi)
        b += (det * w) * (d_el @ phi)
    return ElementMatrix(A, b)


def simplex_exact(powers: tuple[int, int, int, int], geom: ElementGeometry) -> float:
    """Exact integral of a barycentric monomial over an affine tetrahedron.

    For exponents (a, b, c, d) of the four barycentric functions the
    classical formula gives  a! b! c! d! / (a+b+c+d+3)! * 6V.
    """
    if geom.element is not ElementType.TETRAHEDRON:
        raise ValueError("barycentric monomial formula applies to tetrahedra")
    if len(powers) != 4 or any(p < 0 or p != int(p) for p in powers):
        raise ValueError("powers must be four non-negative integers")
    v = geom.coords
    _, det = adjugate_3x3((v[1:] - v[0]).T)
    six_v = abs(det)
    a, b, c, d = (int(p) for p in powers)
    num = factorial(a) * factorial(b) * factorial(c) * factorial(d)
    return num / factorial(a + b + c + d + 3) * six_v
