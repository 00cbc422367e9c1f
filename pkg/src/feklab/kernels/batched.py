"""Batch integration: the element loop, vectorized and parallelized.

One logical thread per element is the parallelization model; here the
element axis becomes the vector axis of numpy arrays, and worker threads
split the batch into contiguous chunks, processed in fixed-size blocks
so working arrays stay cache resident.  Internally all data is held
structure-of-arrays style: one contiguous array per scalar datum, an
element per lane.

Every arithmetic step is an elementwise expression, so results are
bitwise independent of both the worker count and the storage layout of
the input batch (inputs are canonicalized to element order before any
arithmetic).

The loop skeletons follow the per-element kernels of
:mod:`feklab.kernels.scalar` -- the variant fixes where Jacobian terms
and global derivatives are (re)computed and at which granularity results
are stored.  On top of that the batch kernels apply the standard
optimizations a compiler performs on the scalar code and which the
operation-count model already assumes: loop-invariant terms are hoisted
out of the quadrature loop on the element-constant-Jacobian path, and
symmetric stiffness contributions (identity diffusion) are computed once
per unordered pair.  Matrix entries accumulate in scratch lanes and are
stored at the variant's granularity (whole matrix / row / entry).

Global memory traffic is instrumented where batch data is actually
unpacked and results are stored: geometry and coefficient reads per
element, stiffness and load writes per element.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateElement, GeometryError, InvertedElement, ShapeMismatch
from ..geometry import DEGENERACY_REL_TOL
from ..layout import BatchLayout, ELEMENT_MAJOR, ElementBatch, pack_rows
from ..problems import (
    ElementMatrix,
    GeometryPath,
    KernelDescriptor,
    ProblemClass,
    Variant,
)
from ..refelem import reference_element

BLOCK_ELEMENTS = 8192  # 64 KB lanes, sized for L2 residency


@dataclass
class TrafficCounters:
    """Per-batch totals of global memory accesses (doubles moved)."""

    geometry_reads: int = 0
    coefficient_reads: int = 0
    stiffness_writes: int = 0
    load_writes: int = 0

    @property
    def total(self) -> int:
        return (
            self.geometry_reads
            + self.coefficient_reads
            + self.stiffness_writes
            + self.load_writes
        )

    def per_element(self, n_elements: int) -> float:
        return self.total / n_elements

    def breakdown_per_element(self, n_elements: int) -> tuple[float, float, float, float]:
        return (
            self.geometry_reads / n_elements,
            self.coefficient_reads / n_elements,
            self.stiffness_writes / n_elements,
            self.load_writes / n_elements,
        )


@dataclass
class BatchResult:
    """Stiffness matrices and load vectors for a whole batch."""

    descriptor: KernelDescriptor
    n_elements: int
    stiffness: np.ndarray  # (n, n_shape, n_shape)
    load: np.ndarray       # (n, n_shape)
    traffic: TrafficCounters
    out_layout: BatchLayout = field(default=ELEMENT_MAJOR)

    def element_matrix(self, e: int) -> ElementMatrix:
        if not 0 <= e < self.n_elements:
            raise IndexError(f"element index {e} out of range")
        return ElementMatrix(self.stiffness[e].copy(), self.load[e].copy())

    def output_rows(self) -> np.ndarray:
        """(n, n_shape**2 + n_shape) rows: stiffness entries then load."""
        n = self.n_elements
        return np.concatenate([self.stiffness.reshape(n, -1), self.load], axis=1)

    def flat_output(self, pad_value: float = np.nan) -> np.ndarray:
        """Rows flattened according to ``out_layout``."""
        return pack_rows(self.output_rows(), self.out_layout, pad_value)


# --------------------------------------------------------------------------
# structure-of-arrays primitives (lists of contiguous per-datum lanes)
# --------------------------------------------------------------------------


def _columns(rows: np.ndarray) -> list[np.ndarray]:
    t = np.ascontiguousarray(rows.T)
    return [t[i] for i in range(t.shape[0])]


def _axpy_fixed(coefs, lanes) -> np.ndarray:
    """sum_k coefs[k] * lanes[k] with fixed order; skips exact zeros.

    May return one of ``lanes`` itself (unit coefficient, single term);
    callers treat the result as read-only.
    """
    out = None
    for coef, lane in zip(coefs, lanes):
        if coef == 0.0:
            continue
        term = lane if coef == 1.0 else coef * lane
        out = term if out is None else out + term
    if out is None:
        return np.zeros_like(lanes[0])
    return out


def _bbox_scale(cols: list[np.ndarray], n_vertices: int) -> np.ndarray:
    acc = None
    for i in range(3):
        lanes = [cols[v * 3 + i] for v in range(n_vertices)]
        mx = lanes[0]
        mn = lanes[0]
        for lane in lanes[1:]:
            mx = np.maximum(mx, lane)
            mn = np.minimum(mn, lane)
        span = mx - mn
        term = span * span
        acc = term if acc is None else acc + term
    return np.sqrt(acc)


def _adjugate(m) -> tuple[list[list[np.ndarray]], np.ndarray]:
    """Cofactor adjugate and determinant of a 3x3 grid of lanes."""
    (a, b, c), (d, e, f), (g, h, i) = m
    c00 = e * i - f * h
    c01 = f * g - d * i
    c02 = d * h - e * g
    det = a * c00 + b * c01 + c * c02
    adj = [
        [c00, c * h - b * i, b * f - c * e],
        [c01, a * i - c * g, c * d - a * f],
        [c02, b * g - a * h, a * e - b * d],
    ]
    return adj, det


def _check_dets(det: np.ndarray, scale: np.ndarray, base_index: int, q=None) -> None:
    tol = DEGENERACY_REL_TOL * scale**3
    degenerate = np.abs(det) <= tol
    inverted = (det < 0.0) & ~degenerate
    if not (degenerate.any() or inverted.any()):
        return
    idx = int(np.flatnonzero(degenerate | inverted)[0])
    if degenerate[idx]:
        raise DegenerateElement(
            f"|det J| = {abs(det[idx]):.3e} <= {tol[idx]:.3e}", base_index + idx, q
        )
    raise InvertedElement(f"det J = {det[idx]:.3e} < 0", base_index + idx, q)


def _invert(adj, det):
    inv_det = 1.0 / det
    return [[adj[k][i] * inv_det for i in range(3)] for k in range(3)]


def _affine_jacobian(cols, scale, base_index):
    """dxi/dx lanes and det for affine tetrahedra."""
    dx = [[cols[(k + 1) * 3 + i] - cols[i] for k in range(3)] for i in range(3)]
    adj, det = _adjugate(dx)
    _check_dets(det, scale, base_index)
    return _invert(adj, det), det


def _point_jacobian(cols, ld_q, scale, base_index, q, n_vertices):
    """dxi/dx lanes and det of the multilinear map at quadrature point q."""
    dx = [
        [
            _axpy_fixed(
                [ld_q[v, k] for v in range(n_vertices)],
                [cols[v * 3 + i] for v in range(n_vertices)],
            )
            for k in range(3)
        ]
        for i in range(3)
    ]
    adj, det = _adjugate(dx)
    _check_dets(det, scale, base_index, q)
    return _invert(adj, det), det


def _gdx_all(inv, ld_q) -> list[list[np.ndarray]]:
    """Global derivative lanes g[s][i] for all shape functions."""
    n_s = len(ld_q)
    return [
        [_axpy_fixed(ld_q[s], [inv[0][i], inv[1][i], inv[2][i]]) for i in range(3)]
        for s in range(n_s)
    ]


def _gdx_one(inv, ld_s) -> list[np.ndarray]:
    return [_axpy_fixed(ld_s, [inv[0][i], inv[1][i], inv[2][i]]) for i in range(3)]


def _stack_matrix(acc, n_s) -> np.ndarray:
    """acc[r][s] lanes -> (n, n_s, n_s)."""
    flat = [acc[r][s] for r in range(n_s) for s in range(n_s)]
    return np.stack(flat, axis=1).reshape(-1, n_s, n_s)


def _stack_rows(acc_rows) -> np.ndarray:
    return np.stack(acc_rows, axis=1)


# --------------------------------------------------------------------------
# problem-specific final updates
# --------------------------------------------------------------------------


class _PoissonBatch:
    """Identity diffusion: A is symmetric, entries need derivatives only."""

    symmetric = True

    def __init__(self, coeff_cols, n_quad):
        self.d0 = coeff_cols  # d0[q] lane

    @staticmethod
    def a_term(val_r, g_r, val_s, g_s):
        return g_r[0] * g_s[0] + g_r[1] * g_s[1] + g_r[2] * g_s[2]

    def b_term(self, val_r, g_r, q):
        return val_r * self.d0[q]


class _ConvDiffBatch:
    symmetric = False

    def __init__(self, coeff_cols, n_quad):
        self.c = [[coeff_cols[4 * i + j] for j in range(4)] for i in range(4)]
        self.d = coeff_cols[16:20]

    def a_term(self, val_r, g_r, val_s, g_s):
        c = self.c
        acc = (val_r * val_s) * c[0][0]
        for j in range(3):
            acc = acc + val_r * (c[0][j + 1] * g_s[j])
        for i in range(3):
            acc = acc + val_s * (c[i + 1][0] * g_r[i])
            ci = c[i + 1]
            for j in range(3):
                acc = acc + ci[j + 1] * (g_r[i] * g_s[j])
        return acc

    def b_term(self, val_r, g_r, q):
        d = self.d
        return val_r * d[0] + d[1] * g_r[0] + d[2] * g_r[1] + d[3] * g_r[2]


def _adapter(problem, coeff_cols, n_quad):
    if problem is ProblemClass.POISSON:
        return _PoissonBatch(coeff_cols, n_quad)
    return _ConvDiffBatch(coeff_cols, n_quad)


def _pair_terms(upd, vals, gdx, n_s):
    """Hoisted per-pair A terms for an element-constant basis.

    Valid only on the linear path where global derivatives do not depend
    on the point; value slots of tetrahedra enter ConvDiff terms per
    point, so those contributions stay inside the q loop (handled by
    ``_convdiff_q_term``).
    """
    return [
        [upd.a_term(vals[r], gdx[r], vals[s], gdx[s]) for s in range(n_s)]
        for r in range(n_s)
    ]


class _ConvDiffLinear:
    """ConvDiff on the constant-Jacobian path: q-invariant parts hoisted.

    The entry integrand splits into a derivative-derivative block
    (q-invariant), value-derivative blocks scaled by the (per-point)
    basis values, and the value-value reaction term.
    """

    def __init__(self, upd: _ConvDiffBatch, gdx, n_s):
        c = upd.c
        self.upd = upd
        self.dd = [
            [
                _axpy_fixed(
                    [1.0] * 9,
                    [c[i + 1][j + 1] * (gdx[r][i] * gdx[s][j]) for i in range(3) for j in range(3)],
                )
                for s in range(n_s)
            ]
            for r in range(n_s)
        ]
        self.row0 = [  # sum_j c[0][j+1] g_s[j], scales with val_r
            _axpy_fixed([1.0] * 3, [c[0][j + 1] * gdx[s][j] for j in range(3)])
            for s in range(n_s)
        ]
        self.col0 = [  # sum_i c[i+1][0] g_r[i], scales with val_s
            _axpy_fixed([1.0] * 3, [c[i + 1][0] * gdx[r][i] for i in range(3)])
            for r in range(n_s)
        ]
        self.c00 = c[0][0]

    def term(self, r, s, val_r, val_s):
        return (
            self.dd[r][s]
            + val_r * self.row0[s]
            + val_s * self.col0[r]
            + (val_r * val_s) * self.c00
        )


# --------------------------------------------------------------------------
# the six kernels
# --------------------------------------------------------------------------


def _linear_setup(coords_rows, coeff_rows, problem, table, base_index):
    n_v = coords_rows.shape[1]
    cols = _columns(coords_rows.reshape(len(coords_rows), -1))
    inv, det = _affine_jacobian(cols, _bbox_scale(cols, n_v), base_index)
    gdx = _gdx_all(inv, table.local_derivatives[0])
    upd = _adapter(problem, _columns(coeff_rows), table.values.shape[0])
    return upd, gdx, det


def _linear_terms(upd, gdx, vals0, n_s, problem):
    """Per-pair q-invariant machinery for the linear path."""
    if problem is ProblemClass.POISSON:
        terms = _pair_terms(upd, vals0, gdx, n_s)
        return lambda r, s, vals: terms[r][s]
    hoisted = _ConvDiffLinear(upd, gdx, n_s)
    return lambda r, s, vals: hoisted.term(r, s, vals[r], vals[s])


def _qss_linear(coords_rows, coeff_rows, problem, rule, table, base_index):
    n = len(coords_rows)
    n_q, n_s = table.values.shape
    upd, gdx, det = _linear_setup(coords_rows, coeff_rows, problem, table, base_index)
    term = _linear_terms(upd, gdx, table.values[0], n_s, problem)
    symmetric = upd.symmetric
    acc = [[None] * n_s for _ in range(n_s)]
    acc_b = [np.zeros(n) for _ in range(n_s)]
    for q in range(n_q):
        vol = det * rule.weights[q]
        vals = table.values[q]
        for r in range(n_s):
            for s in range(r if symmetric else 0, n_s):
                upd_val = vol * term(r, s, vals)
                acc[r][s] = upd_val if acc[r][s] is None else acc[r][s] + upd_val
            acc_b[r] += vol * upd.b_term(vals[r], gdx[r], q)
    if symmetric:
        for r in range(n_s):
            for s in range(r):
                acc[r][s] = acc[s][r]
    return _stack_matrix(acc, n_s), _stack_rows(acc_b)


def _sqs_linear(coords_rows, coeff_rows, problem, rule, table, base_index):
    n = len(coords_rows)
    n_q, n_s = table.values.shape
    upd, gdx, det = _linear_setup(coords_rows, coeff_rows, problem, table, base_index)
    term = _linear_terms(upd, gdx, table.values[0], n_s, problem)
    symmetric = upd.symmetric
    acc = [[None] * n_s for _ in range(n_s)]
    acc_b = [np.zeros(n) for _ in range(n_s)]
    for r in range(n_s):
        for q in range(n_q):
            vol = det * rule.weights[q]
            vals = table.values[q]
            for s in range(r if symmetric else 0, n_s):
                upd_val = vol * term(r, s, vals)
                acc[r][s] = upd_val if acc[r][s] is None else acc[r][s] + upd_val
            acc_b[r] += vol * upd.b_term(vals[r], gdx[r], q)
    if symmetric:
        for r in range(n_s):
            for s in range(r):
                acc[r][s] = acc[s][r]
    return _stack_matrix(acc, n_s), _stack_rows(acc_b)


def _ssq_linear(coords_rows, coeff_rows, problem, rule, table, base_index):
    n = len(coords_rows)
    n_q, n_s = table.values.shape
    upd, gdx, det = _linear_setup(coords_rows, coeff_rows, problem, table, base_index)
    term = _linear_terms(upd, gdx, table.values[0], n_s, problem)
    symmetric = upd.symmetric
    acc = [[None] * n_s for _ in range(n_s)]
    acc_b = [None] * n_s
    for r in range(n_s):
        for s in range(n_s):
            if symmetric and s < r:
                acc[r][s] = acc[s][r]
                continue
            entry = np.zeros(n)
            entry_b = np.zeros(n) if r == s else None
            for q in range(n_q):
                vol = det * rule.weights[q]
                vals = table.values[q]
                entry += vol * term(r, s, vals)
                if r == s:
                    entry_b += vol * upd.b_term(vals[r], gdx[r], q)
            acc[r][s] = entry
            if r == s:
                acc_b[r] = entry_b
    return _stack_matrix(acc, n_s), _stack_rows(acc_b)


def _qss_generic(coords_rows, coeff_rows, problem, rule, table, base_index):
    n = len(coords_rows)
    n_q, n_s = table.values.shape
    n_v = coords_rows.shape[1]
    cols = _columns(coords_rows.reshape(n, -1))
    scale = _bbox_scale(cols, n_v)
    upd = _adapter(problem, _columns(coeff_rows), n_q)
    symmetric = upd.symmetric
    acc = [[None] * n_s for _ in range(n_s)]
    acc_b = [np.zeros(n) for _ in range(n_s)]
    for q in range(n_q):
        ld_q = table.local_derivatives[q]
        inv, det = _point_jacobian(cols, ld_q, scale, base_index, q, n_v)
        vol = det * rule.weights[q]
        gdx = _gdx_all(inv, ld_q)
        vals = table.values[q]
        for r in range(n_s):
            for s in range(r if symmetric else 0, n_s):
                upd_val = vol * upd.a_term(vals[r], gdx[r], vals[s], gdx[s])
                acc[r][s] = upd_val if acc[r][s] is None else acc[r][s] + upd_val
            acc_b[r] += vol * upd.b_term(vals[r], gdx[r], q)
    if symmetric:
        for r in range(n_s):
            for s in range(r):
                acc[r][s] = acc[s][r]
    return _stack_matrix(acc, n_s), _stack_rows(acc_b)


def _sqs_generic(coords_rows, coeff_rows, problem, rule, table, base_index):
    n = len(coords_rows)
    n_q, n_s = table.values.shape
    n_v = coords_rows.shape[1]
    cols = _columns(coords_rows.reshape(n, -1))
    scale = _bbox_scale(cols, n_v)
    upd = _adapter(problem, _columns(coeff_rows), n_q)
    acc = [[None] * n_s for _ in range(n_s)]
    acc_b = [np.zeros(n) for _ in range(n_s)]
    for r in range(n_s):
        for q in range(n_q):
            ld_q = table.local_derivatives[q]
            inv, det = _point_jacobian(cols, ld_q, scale, base_index, q, n_v)
            vol = det * rule.weights[q]
            gdx = _gdx_all(inv, ld_q)
            vals = table.values[q]
            for s in range(n_s):
                upd_val = vol * upd.a_term(vals[r], gdx[r], vals[s], gdx[s])
                acc[r][s] = upd_val if acc[r][s] is None else acc[r][s] + upd_val
            acc_b[r] += vol * upd.b_term(vals[r], gdx[r], q)
    return _stack_matrix(acc, n_s), _stack_rows(acc_b)


def _ssq_generic(coords_rows, coeff_rows, problem, rule, table, base_index):
    n = len(coords_rows)
    n_q, n_s = table.values.shape
    n_v = coords_rows.shape[1]
    cols = _columns(coords_rows.reshape(n, -1))
    scale = _bbox_scale(cols, n_v)
    upd = _adapter(problem, _columns(coeff_rows), n_q)
    symmetric = upd.symmetric
    acc = [[None] * n_s for _ in range(n_s)]
    acc_b = [None] * n_s
    for r in range(n_s):
        for s in range(n_s):
            if symmetric and s < r:
                acc[r][s] = acc[s][r]
                continue
            entry = np.zeros(n)
            entry_b = np.zeros(n) if r == s else None
            for q in range(n_q):
                ld_q = table.local_derivatives[q]
                inv, det = _point_jacobian(cols, ld_q, scale, base_index, q, n_v)
                vol = det * rule.weights[q]
                vals = table.values[q]
                g_r = _gdx_one(inv, ld_q[r])
                g_s = g_r if s == r else _gdx_one(inv, ld_q[s])
                entry += vol * upd.a_term(vals[r], g_r, vals[s], g_s)
                if r == s:
                    entry_b += vol * upd.b_term(vals[r], g_r, q)
            acc[r][s] = entry
            if r == s:
                acc_b[r] = entry_b
    return _stack_matrix(acc, n_s), _stack_rows(acc_b)


_BATCHED_KERNELS = {
    (Variant.QSS, GeometryPath.GEO_GENERIC): _qss_generic,
    (Variant.QSS, GeometryPath.GEO_LINEAR): _qss_linear,
    (Variant.SQS, GeometryPath.GEO_GENERIC): _sqs_generic,
    (Variant.SQS, GeometryPath.GEO_LINEAR): _sqs_linear,
    (Variant.SSQ, GeometryPath.GEO_GENERIC): _ssq_generic,
    (Variant.SSQ, GeometryPath.GEO_LINEAR): _ssq_linear,
}


def _run_range(kernel, coords, coeff_rows, problem, rule, table, lo, hi, A, b):
    for start in range(lo, hi, BLOCK_ELEMENTS):
        stop = min(start + BLOCK_ELEMENTS, hi)
        A[start:stop], b[start:stop] = kernel(
            coords[start:stop], coeff_rows[start:stop], problem, rule, table, start
        )


def integrate_batch(
    desc: KernelDescriptor,
    batch: ElementBatch,
    out_layout: BatchLayout = ELEMENT_MAJOR,
    workers: int = 1,
) -> BatchResult:
    """Integrate every element of a batch with the kernel named by ``desc``.

    The first degenerate or inverted element aborts the batch; the raised
    error carries the element index (and quadrature point on the generic
    path).  Results are bitwise independent of ``workers`` and of
    ``batch.layout``.
    """
    if batch.element_type is not desc.element or batch.problem is not desc.problem:
        raise ShapeMismatch(
            f"descriptor ({desc.element.value}, {desc.problem.value}) does not match "
            f"batch ({batch.element_type.value}, {batch.problem.value})"
        )
    rule, table = reference_element(desc.element)
    n = batch.n_elements
    n_s = desc.element.n_shape

    traffic = TrafficCounters()
    geometry_rows = batch.geometry_rows()
    coeff_rows = batch.coefficient_rows()
    traffic.geometry_reads += geometry_rows.size
    traffic.coefficient_reads += coeff_rows.size
    coords = geometry_rows.reshape(n, desc.element.n_vertices, 3)

    kernel = _BATCHED_KERNELS[(desc.variant, desc.geometry_path)]
    A = np.empty((n, n_s, n_s))
    b = np.empty((n, n_s))

    workers = max(1, min(int(workers), n))
    if workers == 1:
        _run_range(kernel, coords, coeff_rows, desc.problem, rule, table, 0, n, A, b)
    else:
        bounds = np.linspace(0, n, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(
                    _run_range,
                    kernel,
                    coords,
                    coeff_rows,
                    desc.problem,
                    rule,
                    table,
                    int(lo),
                    int(hi),
                    A,
                    b,
                )
                for lo, hi in zip(bounds[:-1], bounds[1:])
                if hi > lo
            ]
            errors = [f.exception() for f in futures]
        geometry_errors = [
            e
            for e in errors
            if isinstance(e, GeometryError) and e.element_index is not None
        ]
        if geometry_errors:
            raise min(geometry_errors, key=lambda e: e.element_index)
        for e in errors:
            if e is not None:
                raise e

    traffic.stiffness_writes += n * n_s * n_s
    traffic.load_writes += n * n_s
    return BatchResult(desc, n, A, b, traffic, out_layout)
