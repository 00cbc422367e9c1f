"""Reference elements: quadrature rules and tabulated shape-function data.

Two element types are supported, both first order:

* tetrahedron -- linear basis on the unit simplex with vertices
  (0,0,0), (1,0,0), (0,1,0), (0,0,1);
* prism -- multilinear basis on the unit triangle in (xi, eta) crossed
  with zeta in [-1, 1], i.e. phi_a = lambda_a(xi, eta) * (1 -+ zeta) / 2
  with lambda the barycentric triangle functions.

Quadrature: the minimal standard rules matching the point counts used by
the kernels -- a symmetric 4-point degree-2 simplex rule for tets and a
3-point degree-2 triangle rule tensored with 2-point Gauss-Legendre for
prisms.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from math import sqrt

import numpy as np

_INSIDE_TOL = 1e-12


class ElementType(Enum):
    TETRAHEDRON = "tet"
    PRISM = "prism"

    @property
    def n_shape(self) -> int:
        """Number of shape functions (equals the vertex count)."""
        return 4 if self is ElementType.TETRAHEDRON else 6

    @property
    def n_quad(self) -> int:
        """Number of quadrature points of the production rule."""
        return 4 if self is ElementType.TETRAHEDRON else 6

    @property
    def n_vertices(self) -> int:
        return self.n_shape

    @property
    def geometry_size(self) -> int:
        """Scalar count of one element's geometry input (vertices x 3)."""
        return 3 * self.n_vertices

    @property
    def reference_volume(self) -> float:
        """Volume of the reference element (1/6 simplex, 1/2 * 2 prism)."""
        return 1.0 / 6.0 if self is ElementType.TETRAHEDRON else 1.0

    @property
    def reference_vertices(self) -> np.ndarray:
        return _reference_vertices(self)


@dataclass(frozen=True)
class QuadratureRule:
    """Quadrature points (local coordinates, always 3 components) and weights."""

    points: np.ndarray   # (n_quad, 3)
    weights: np.ndarray  # (n_quad,)

    @property
    def n_points(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class ShapeFunctionTable:
    """Shape-function values and local derivatives at the quadrature points."""

    values: np.ndarray             # (n_quad, n_shape)
    local_derivatives: np.ndarray  # (n_quad, n_shape, 3)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@lru_cache(maxsize=None)
def _reference_vertices(etype: ElementType) -> np.ndarray:
    if etype is ElementType.TETRAHEDRON:
        v = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
    else:
        v = [(0, 0, -1), (1, 0, -1), (0, 1, -1), (0, 0, 1), (1, 0, 1), (0, 1, 1)]
    return _freeze(np.array(v, dtype=float))


def _tet_rule() -> QuadratureRule:
    # symmetric degree-2 rule: one barycentric coordinate (5+3*sqrt5)/20,
    # the others (5-sqrt5)/20; weights V/4 = 1/24
    a = (5.0 - sqrt(5.0)) / 20.0
    b = (5.0 + 3.0 * sqrt(5.0)) / 20.0
    pts = np.array([[a, a, a], [b, a, a], [a, b, a], [a, a, b]])
    return QuadratureRule(_freeze(pts), _freeze(np.full(4, 1.0 / 24.0)))


def _prism_rule() -> QuadratureRule:
    # degree-2 triangle rule tensored with 2-point Gauss-Legendre on [-1, 1]
    tri = [(1.0 / 6.0, 1.0 / 6.0), (2.0 / 3.0, 1.0 / 6.0), (1.0 / 6.0, 2.0 / 3.0)]
    g = 1.0 / sqrt(3.0)
    pts = [(x, y, z) for (x, y) in tri for z in (-g, g)]
    w = np.full(6, 1.0 / 6.0)
    return QuadratureRule(_freeze(np.array(pts)), _freeze(w))


def shape_at(etype: ElementType, xi) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate shape functions and their local derivatives at a point.

    Parameters
    ----------
    etype : ElementType
    xi : array_like, shape (3,)
        Local coordinates; must lie inside the closed reference element
        (tolerance 1e-12 -- a point outside signals a caller bug).

    Returns
    -------
    values : ndarray, shape (n_shape,)
    derivs : ndarray, shape (n_shape, 3)
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (3,):
        raise ValueError(f"local coordinate must have 3 components, got {xi.shape}")
    x, y, z = xi
    t = _INSIDE_TOL
    if etype is ElementType.TETRAHEDRON:
        if x < -t or y < -t or z < -t or x + y + z > 1.0 + t:
            raise ValueError(f"point {xi} outside reference tetrahedron")
        values = np.array([1.0 - x - y - z, x, y, z])
        derivs = np.array(
            [[-1.0, -1.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        )
        return values, derivs
    if x < -t or y < -t or x + y > 1.0 + t or abs(z) > 1.0 + t:
        raise ValueError(f"point {xi} outside reference prism")
    lam = np.array([1.0 - x - y, x, y])
    dlam = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    lo = 0.5 * (1.0 - z)
    hi = 0.5 * (1.0 + z)
    values = np.concatenate([lam * lo, lam * hi])
    derivs = np.zeros((6, 3))
    derivs[:3, :2] = dlam * lo
    derivs[3:, :2] = dlam * hi
    derivs[:3, 2] = -0.5 * lam
    derivs[3:, 2] = 0.5 * lam
    return values, derivs


@lru_cache(maxsize=None)
def reference_element(etype: ElementType) -> tuple[QuadratureRule, ShapeFunctionTable]:
    """Return the quadrature rule and shape-function table for ``etype``.

    The table rows are produced by ``shape_at`` evaluated at the rule's
    points, so tabulated and on-the-fly values share one arithmetic path.
    Results are cached and immutable.
    """
    rule = _tet_rule() if etype is ElementType.TETRAHEDRON else _prism_rule()
    vals = np.empty((rule.n_points, etype.n_shape))
    ders = np.empty((rule.n_points, etype.n_shape, 3))
    for q, point in enumerate(rule.points):
        vals[q], ders[q] = shape_at(etype, point)
    return rule, ShapeFunctionTable(_freeze(vals), _freeze(ders))
