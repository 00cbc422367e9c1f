"""Element mapping Jacobians: dx/dxi, dxi/dx, det J and vol = det J * w.

Tetrahedra are affine images of the reference simplex, so their Jacobian
is constant per element (``jacobian_affine``).  Prisms are multilinear
and need per-quadrature-point Jacobians (``jacobian_at_point``); the
generic path also accepts tetrahedra, which is useful for cross-checking
the affine fast path.

The 3x3 inverse uses explicit cofactor formulas (closed form), the same
operation structure the kernel cost model assumes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateElement, InvertedElement
from .refelem import ElementType, QuadratureRule, ShapeFunctionTable

# |det J| at or below 1e-14 * (bounding-box diagonal)^3 counts as degenerate;
# relative to element scale so the check is unit independent.
DEGENERACY_REL_TOL = 1e-14


@dataclass(frozen=True)
class ElementGeometry:
    """Vertex coordinates of one element (n_vertices x 3, physical units)."""

    element: ElementType
    coords: np.ndarray

    def __post_init__(self):
        coords = np.ascontiguousarray(self.coords, dtype=float)
        expected = (self.element.n_vertices, 3)
        if coords.shape != expected:
            raise ValueError(
                f"{self.element.value} geometry must have shape {expected}, "
                f"got {coords.shape}"
            )
        object.__setattr__(self, "coords", coords)

    def bounding_box_scale(self) -> float:
        span = self.coords.max(axis=0) - self.coords.min(axis=0)
        return float(np.sqrt((span * span).sum()))


@dataclass(frozen=True)
class JacobianData:
    """Jacobian terms of the reference-to-real mapping.

    ``vol`` is det J scaled by quadrature weight(s): a per-point array for
    the affine path (valid at every point) and a scalar for the
    point-local path.
    """

    dx_dxi: np.ndarray  # (3, 3)
    dxi_dx: np.ndarray  # (3, 3)
    det: float
    vol: np.ndarray | float


def adjugate_3x3(m: np.ndarray) -> tuple[np.ndarray, float]:
    """Closed-form cofactor adjugate and determinant (no division)."""
    a, b, c = m[0]
    d, e, f = m[1]
    g, h, i = m[2]
    c00 = e * i - f * h
    c01 = f * g - d * i
    c02 = d * h - e * g
    det = a * c00 + b * c01 + c * c02
    adj = np.array(
        [
            [c00, c * h - b * i, b * f - c * e],
            [c01, a * i - c * g, c * d - a * f],
            [c02, b * g - a * h, a * e - b * d],
        ]
    )
    return adj, float(det)


def invert_3x3(m: np.ndarray) -> tuple[np.ndarray, float]:
    """Cofactor inverse; returns (inverse, determinant)."""
    adj, det = adjugate_3x3(m)
    return adj / det, det


def _check_det(det: float, scale: float, element_index=None, point_index=None) -> None:
    tol = DEGENERACY_REL_TOL * scale**3
    if abs(det) <= tol:
        raise DegenerateElement(
            f"|det J| = {abs(det):.3e} <= {tol:.3e}", element_index, point_index
        )
    if det < 0.0:
        raise InvertedElement(f"det J = {det:.3e} < 0", element_index, point_index)


def jacobian_affine(
    geom: ElementGeometry, rule: QuadratureRule, element_index=None
) -> JacobianData:
    """Constant Jacobian of an affine tetrahedron.

    ``vol`` holds det J * w for every quadrature weight of ``rule``.

    Raises
    ------
    DegenerateElement, InvertedElement
    """
    if geom.element is not ElementType.TETRAHEDRON:
        raise ValueError("affine path only applies to tetrahedra")
    v = geom.coords
    dx_dxi = (v[1:] - v[0]).T  # column k = edge vector to vertex k+1
    adj, det = adjugate_3x3(dx_dxi)
    _check_det(det, geom.bounding_box_scale(), element_index)
    return JacobianData(dx_dxi, adj / det, det, det * rule.weights)


def jacobian_at_point(
    geom: ElementGeometry,
    q: int,
    rule: QuadratureRule,
    table: ShapeFunctionTable,
    element_index=None,
) -> JacobianData:
    """Jacobian of a (multilinear) element at quadrature point ``q``.

    dx/dxi is assembled from the vertex coordinates contracted with the
    local derivatives of the geometric shape functions at the point.
    Errors carry the offending point index.
    """
    if not 0 <= q < rule.n_points:
        raise IndexError(f"quadrature point {q} out of range")
    dx_dxi = geom.coords.T @ table.local_derivatives[q]
    adj, det = adjugate_3x3(dx_dxi)
    _check_det(det, geom.bounding_box_scale(), element_index, q)
    return JacobianData(dx_dxi, adj / det, det, float(det * rule.weights[q]))


def global_derivatives(jac: JacobianData, local_derivs: np.ndarray) -> np.ndarray:
    """Chain rule: d phi_s / d x_i = sum_k local[s, k] * dxi_dx[k, i]."""
    return local_derivs @ jac.dxi_dx
