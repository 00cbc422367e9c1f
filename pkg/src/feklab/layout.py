"""Batch containers for element data in two flat-array storage schemes.

``ELEMENT_MAJOR`` keeps the data of one element contiguous: datum ``d``
of element ``e`` lives at flat index ``e*DS + d`` (DS = per-element
datum count).  ``LANE_INTERLEAVED`` groups elements into blocks of
``lane_width`` W (the SIMD-group analog) and interleaves within a block
so consecutive lanes touch consecutive addresses:

    index(e, d) = (e // W) * W * DS  +  d * W  +  e % W

The final partial block is padded up to W; padded slots carry a poison
value (NaN by default, so a stray read surfaces immediately; pass
``pad_value=0.0`` for benign padding) and are never interpreted as
element data.

The same two schemes serve kernel output arrays, with DS = n_shape**2 +
n_shape per element (stiffness entries then load entries).

Batches serialize to a little-endian binary format: a 32-byte header
(magic ``FEKB``, version, element type, problem, layout kind, lane
width, element count) followed by the geometry and coefficient arrays as
float64.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum
from math import ceil
from typing import Sequence

import numpy as np

from .errors import HeterogeneousBatch
from .geometry import ElementGeometry
from .problems import CoefficientSet, ProblemClass
from .refelem import ElementType

LANE_WIDTHS = (1, 4, 8, 16, 32, 64)

MAGIC = b"FEKB"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIIIIQ")  # 32 bytes


class LayoutKind(Enum):
    ELEMENT_MAJOR = "major"
    LANE_INTERLEAVED = "interleaved"


@dataclass(frozen=True)
class BatchLayout:
    """Storage scheme tag plus the interleaving block width."""

    kind: LayoutKind
    lane_width: int = 1

    def __post_init__(self):
        if self.lane_width not in LANE_WIDTHS:
            raise ValueError(
                f"lane_width must be one of {LANE_WIDTHS}, got {self.lane_width}"
            )


# Output arrays use the identical two schemes.
OutputLayout = BatchLayout

ELEMENT_MAJOR = BatchLayout(LayoutKind.ELEMENT_MAJOR)


def pack_rows(rows: np.ndarray, layout: BatchLayout, pad_value: float = np.nan) -> np.ndarray:
    """Flatten per-element rows (n, DS) into a 1-d array in ``layout``."""
    rows = np.ascontiguousarray(rows, dtype=float)
    n, ds = rows.shape
    if layout.kind is LayoutKind.ELEMENT_MAJOR:
        return rows.reshape(-1).copy()
    w = layout.lane_width
    blocks = ceil(n / w) if n else 0
    padded = np.full((blocks * w, ds), pad_value, dtype=float)
    padded[:n] = rows
    return padded.reshape(blocks, w, ds).transpose(0, 2, 1).reshape(-1).copy()


def unpack_rows(flat: np.ndarray, n: int, ds: int, layout: BatchLayout) -> np.ndarray:
    """Recover per-element rows (n, DS) from a flat array, dropping padding."""
    flat = np.asarray(flat, dtype=float)
    if layout.kind is LayoutKind.ELEMENT_MAJOR:
        return flat.reshape(n, ds)
    w = layout.lane_width
    blocks = ceil(n / w) if n else 0
    return (
        flat.reshape(blocks, ds, w).transpose(0, 2, 1).reshape(blocks * w, ds)[:n].copy()
    )


def flat_length(n: int, ds: int, layout: BatchLayout) -> int:
    if layout.kind is LayoutKind.ELEMENT_MAJOR:
        return n * ds
    return ceil(n / layout.lane_width) * layout.lane_width * ds if n else 0


@dataclass(frozen=True)
class ElementBatch:
    """Geometry and PDE coefficients for n homogeneous elements."""

    element_type: ElementType
    problem: ProblemClass
    n_elements: int
    layout: BatchLayout
    geometry_data: np.ndarray     # flat, layout-ordered
    coefficient_data: np.ndarray  # flat, layout-ordered

    @property
    def geometry_datum_count(self) -> int:
        return self.element_type.geometry_size

    @property
    def coefficient_datum_count(self) -> int:
        return self.problem.coefficient_size(self.element_type)

    def __post_init__(self):
        for name, data, ds in (
            ("geometry_data", self.geometry_data, self.geometry_datum_count),
            ("coefficient_data", self.coefficient_data, self.coefficient_datum_count),
        ):
            expected = flat_length(self.n_elements, ds, self.layout)
            if data.shape != (expected,):
                raise ValueError(
                    f"{name} must be flat with {expected} entries, got {data.shape}"
                )

    @classmethod
    def from_arrays(
        cls,
        element_type: ElementType,
        problem: ProblemClass,
        geometry_rows: np.ndarray,
        coefficient_rows: np.ndarray,
        layout: BatchLayout = ELEMENT_MAJOR,
        pad_value: float = np.nan,
    ) -> "ElementBatch":
        geometry_rows = np.ascontiguousarray(geometry_rows, dtype=float)
        coefficient_rows = np.ascontiguousarray(coefficient_rows, dtype=float)
        n = len(geometry_rows)
        if len(coefficient_rows) != n:
            raise ValueError("geometry and coefficient row counts differ")
        return cls(
            element_type,
            problem,
            n,
            layout,
            pack_rows(geometry_rows, layout, pad_value),
            pack_rows(coefficient_rows, layout, pad_value),
        )

    def geometry_rows(self) -> np.ndarray:
        """(n, geometry_size) array in element order, padding removed."""
        return unpack_rows(
            self.geometry_data, self.n_elements, self.geometry_datum_count, self.layout
        )

    def coefficient_rows(self) -> np.ndarray:
        return unpack_rows(
            self.coefficient_data,
            self.n_elements,
            self.coefficient_datum_count,
            self.layout,
        )


def build_batch(
    elements: Sequence[tuple[ElementGeometry, CoefficientSet]],
    layout: BatchLayout = ELEMENT_MAJOR,
    pad_value: float = np.nan,
) -> ElementBatch:
    """Pack (geometry, coefficients) pairs into a flat batch.

    Raises HeterogeneousBatch if the elements mix types or problems.
    """
    if not elements:
        raise ValueError("cannot build an empty batch")
    etype = elements[0][0].element
    problem = elements[0][1].problem
    for i, (geom, coeff) in enumerate(elements):
        if geom.element is not etype or coeff.problem is not problem:
            raise HeterogeneousBatch(
                f"element {i} is ({geom.element.value}, {coeff.problem.value}), "
                f"batch is ({etype.value}, {problem.value})"
            )
    geometry_rows = np.stack([g.coords.reshape(-1) for g, _ in elements])
    coefficient_rows = np.stack([c.flat() for _, c in elements])
    return ElementBatch.from_arrays(
        etype, problem, geometry_rows, coefficient_rows, layout, pad_value
    )


def convert(
    batch: ElementBatch, to: BatchLayout, pad_value: float = np.nan
) -> ElementBatch:
    """Repack a batch into another layout (content-preserving permutation)."""
    if to == batch.layout:
        return ElementBatch(
            batch.element_type,
            batch.problem,
            batch.n_elements,
            batch.layout,
            batch.geometry_data.copy(),
            batch.coefficient_data.copy(),
        )
    return ElementBatch.from_arrays(
        batch.element_type,
        batch.problem,
        batch.geometry_rows(),
        batch.coefficient_rows(),
        to,
        pad_value,
    )


def extract(batch: ElementBatch, e: int) -> tuple[ElementGeometry, CoefficientSet]:
    """Element ``e`` as domain objects, independent of the storage layout."""
    if not 0 <= e < batch.n_elements:
        raise IndexError(f"element index {e} out of range [0, {batch.n_elements})")
    geom_row = batch.geometry_rows()[e]
    coeff_row = batch.coefficient_rows()[e]
    geom = ElementGeometry(batch.element_type, geom_row.reshape(-1, 3))
    coeff = CoefficientSet.from_flat(batch.problem, batch.element_type, coeff_row)
    return geom, coeff


_ETYPE_CODE = {ElementType.TETRAHEDRON: 0, ElementType.PRISM: 1}
_PROBLEM_CODE = {ProblemClass.POISSON: 0, ProblemClass.CONV_DIFF: 1}
_KIND_CODE = {LayoutKind.ELEMENT_MAJOR: 0, LayoutKind.LANE_INTERLEAVED: 1}


def write_batch(batch: ElementBatch, path) -> None:
    """Serialize a batch to the binary format described in the module doc."""
    header = _HEADER.pack(
        MAGIC,
        FORMAT_VERSION,
        _ETYPE_CODE[batch.element_type],
        _PROBLEM_CODE[batch.problem],
        _KIND_CODE[batch.layout.kind],
        batch.layout.lane_width,
        batch.n_elements,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(batch.geometry_data.astype("<f8").tobytes())
        fh.write(batch.coefficient_data.astype("<f8").tobytes())


def read_batch(path) -> ElementBatch:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, version, et, pr, kind, width, n = _HEADER.unpack(header)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        etype = {v: k for k, v in _ETYPE_CODE.items()}[et]
        problem = {v: k for k, v in _PROBLEM_CODE.items()}[pr]
        layout = BatchLayout({v: k for k, v in _KIND_CODE.items()}[kind], width)
        sizes = (
            flat_length(n, etype.geometry_size, layout),
            flat_length(n, problem.coefficient_size(etype), layout),
        )
        arrays = []
        for size in sizes:
            raw = fh.read(size * 8)
            if len(raw) != size * 8:
                raise ValueError(f"{path}: truncated data section")
            arrays.append(np.frombuffer(raw, dtype="<f8").astype(float))
        if fh.read(1):
            raise ValueError(f"{path}: trailing bytes after data section")
    return ElementBatch(etype, problem, n, layout, arrays[0], arrays[1])
