"""Synthetic unit-cube meshes with seeded random PDE coefficients.

Tetrahedral meshes split every nx x ny x nz grid cell into the six path
tetrahedra of the Kuhn subdivision (one per axis permutation, reordered
to positive orientation).  Prismatic meshes split each of the nx x ny
base squares into two triangles extruded over the full height, giving
2 * nx * ny prisms.  Either way the mesh fills the unit cube exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .layout import BatchLayout, ELEMENT_MAJOR, ElementBatch
from .problems import ProblemClass
from .refelem import ElementType

# even permutations keep the path-tet orientation positive; odd ones need
# their middle vertices swapped
_PERM_SIGNS = {
    perm: int(np.sign(np.linalg.det(np.eye(3)[list(perm)])))
    for perm in permutations(range(3))
}


@dataclass(frozen=True)
class MeshSpec:
    """Unit-cube subdivision counts and the element type to fill it with."""

    nx: int
    ny: int
    nz: int
    element_type: ElementType

    def __post_init__(self):
        if min(self.nx, self.ny, self.nz) < 1:
            raise ValueError("subdivision counts must be >= 1")

    @property
    def n_elements(self) -> int:
        if self.element_type is ElementType.TETRAHEDRON:
            return 6 * self.nx * self.ny * self.nz
        return 2 * self.nx * self.ny


def _tet_geometry_rows(spec: MeshSpec) -> np.ndarray:
    hx, hy, hz = 1.0 / spec.nx, 1.0 / spec.ny, 1.0 / spec.nz
    h = np.array([hx, hy, hz])
    rows = np.empty((spec.n_elements, 12))
    axes = np.eye(3)
    k = 0
    for ix in range(spec.nx):
        for iy in range(spec.ny):
            for iz in range(spec.nz):
                origin = np.array([ix * hx, iy * hy, iz * hz])
                for perm in permutations(range(3)):
                    v0 = origin
                    v1 = v0 + axes[perm[0]] * h
                    v2 = v1 + axes[perm[1]] * h
                    v3 = v2 + axes[perm[2]] * h
                    if _PERM_SIGNS[perm] < 0:
                        v1, v2 = v2, v1
                    rows[k] = np.concatenate([v0, v1, v2, v3])
                    k += 1
    return rows


def _prism_geometry_rows(spec: MeshSpec) -> np.ndarray:
    hx, hy = 1.0 / spec.nx, 1.0 / spec.ny
    rows = np.empty((spec.n_elements, 18))
    k = 0
    for ix in range(spec.nx):
        for iy in range(spec.ny):
            x0, y0 = ix * hx, iy * hy
            x1, y1 = x0 + hx, y0 + hy
            tris = (
                ((x0, y0), (x1, y0), (x0, y1)),
                ((x1, y0), (x1, y1), (x0, y1)),
            )
            for tri in tris:
                bottom = [(x, y, 0.0) for x, y in tri]
                top = [(x, y, 1.0) for x, y in tri]
                rows[k] = np.array(bottom + top).reshape(-1)
                k += 1
    return rows


def generate_mesh(
    spec: MeshSpec,
    coeff_seed: int,
    problem: ProblemClass,
    layout: BatchLayout = ELEMENT_MAJOR,
    pad_value: float = np.nan,
) -> ElementBatch:
    """Deterministic mesh geometry plus seeded uniform(-1, 1) coefficients."""
    if spec.element_type is ElementType.TETRAHEDRON:
        geometry_rows = _tet_geometry_rows(spec)
    else:
        geometry_rows = _prism_geometry_rows(spec)
    rng = np.random.default_rng(coeff_seed)
    coeff_rows = rng.uniform(
        -1.0, 1.0, size=(spec.n_elements, problem.coefficient_size(spec.element_type))
    )
    return ElementBatch.from_arrays(
        spec.element_type, problem, geometry_rows, coeff_rows, layout, pad_value
    )


def spec_for_element_count(element_type: ElementType, n_elements: int) -> MeshSpec:
    """Smallest roughly-cubic spec with at least ``n_elements`` elements."""
    if n_elements < 1:
        raise ValueError("element count must be >= 1")
    if element_type is ElementType.TETRAHEDRON:
        side = int(np.ceil((n_elements / 6.0) ** (1.0 / 3.0)))
        return MeshSpec(side, side, side, element_type)
    side = int(np.ceil(np.sqrt(n_elements / 2.0)))
    return MeshSpec(side, side, 1, element_type)
