"""Randomized correctness corpus: kernels vs. the reference integrator.

Provides seeded generators for non-degenerate random elements and
coefficient sets, and ``run_verification``, which checks every valid
kernel descriptor against the generic reference integrator (and the
batch driver against the per-element kernels) on such a corpus.  The
benchmark CLI runs this gate before it reports any timing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import ElementGeometry
from .kernels import integrate_batch, integrate_element
from .layout import build_batch
from .oracle import integrate_reference
from .problems import (
    CoefficientSet,
    KernelDescriptor,
    ProblemClass,
    case_descriptors,
)
from .refelem import ElementType

DEFAULT_TOLERANCE = 1e-12


def relative_difference(got: np.ndarray, want: np.ndarray) -> float:
    """Frobenius-norm difference relative to the reference norm.

    Zero reference with zero difference counts as exact agreement.
    """
    diff = float(np.linalg.norm(np.asarray(got) - np.asarray(want)))
    ref = float(np.linalg.norm(np.asarray(want)))
    if ref == 0.0:
        return 0.0 if diff == 0.0 else np.inf
    return diff / ref


def matrices_close(got, want, tol: float = DEFAULT_TOLERANCE) -> bool:
    return (
        relative_difference(got.A, want.A) <= tol
        and relative_difference(got.b, want.b) <= tol
    )


def random_tet_geometry(rng: np.random.Generator) -> ElementGeometry:
    """Random well-conditioned, positively oriented tetrahedron."""
    while True:
        v0 = rng.uniform(-1.0, 1.0, size=3)
        edges = rng.uniform(-1.0, 1.0, size=(3, 3))
        det = np.linalg.det(edges)
        if abs(det) < 0.05:
            continue
        if det < 0.0:
            edges[[1, 2]] = edges[[2, 1]]
        return ElementGeometry(
            ElementType.TETRAHEDRON, np.vstack([v0, v0 + edges])
        )


def random_prism_geometry(
    rng: np.random.Generator, twist: float = 0.15
) -> ElementGeometry:
    """Random prism: affine image of the reference plus vertex jitter.

    ``twist`` scales the per-vertex jitter; 0 gives affine prisms with
    constant Jacobian, larger values genuinely non-constant ones.
    Regenerates until the Jacobian is safely positive at the quadrature
    points.
    """
    from .geometry import jacobian_at_point
    from .refelem import reference_element

    ref = ElementType.PRISM.reference_vertices
    rule, table = reference_element(ElementType.PRISM)
    while True:
        linear = rng.uniform(-1.0, 1.0, size=(3, 3))
        if np.linalg.det(linear) < 0.05:  # also rejects reflections
            continue
        shift = rng.uniform(-1.0, 1.0, size=3)
        coords = ref @ linear.T + shift
        coords += twist * rng.uniform(-1.0, 1.0, size=coords.shape)
        geom = ElementGeometry(ElementType.PRISM, coords)
        try:
            dets = [
                jacobian_at_point(geom, q, rule, table).det
                for q in range(rule.n_points)
            ]
        except Exception:
            continue
        scale = geom.bounding_box_scale()
        if min(dets) > 1e-3 * scale**3:
            return geom


def random_geometry(etype: ElementType, rng: np.random.Generator) -> ElementGeometry:
    if etype is ElementType.TETRAHEDRON:
        return random_tet_geometry(rng)
    return random_prism_geometry(rng)


def random_coefficients(
    problem: ProblemClass, etype: ElementType, rng: np.random.Generator
) -> CoefficientSet:
    size = problem.coefficient_size(etype)
    return CoefficientSet.from_flat(problem, etype, rng.uniform(-1.0, 1.0, size=size))


@dataclass
class CaseReport:
    element: ElementType
    problem: ProblemClass
    n_elements: int
    max_rel_err: float
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


@dataclass
class VerificationReport:
    tolerance: float
    cases: list[CaseReport] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(case.passed for case in self.cases)

    @property
    def max_rel_err(self) -> float:
        return max((case.max_rel_err for case in self.cases), default=0.0)

    def summary_lines(self) -> list[str]:
        lines = []
        for case in self.cases:
            status = "ok" if case.passed else "FAIL"
            lines.append(
                f"{case.element.value}/{case.problem.value}: {status} "
                f"({case.n_elements} elements, max rel err {case.max_rel_err:.2e})"
            )
            lines.extend(f"  {msg}" for msg in case.failures[:5])
        return lines


def run_verification(
    per_case: int = 200,
    seed: int = 20240301,
    tolerance: float = DEFAULT_TOLERANCE,
    descriptors: list[KernelDescriptor] | None = None,
) -> VerificationReport:
    """Compare kernels against the reference integrator on random elements.

    For every (element, problem) case touched by ``descriptors`` (all of
    them when None): the per-element kernels of every applicable
    descriptor and the batch driver must agree with the reference
    integrator within ``tolerance`` relative Frobenius norm.  The batch
    driver is exercised on the whole corpus; the per-element kernels on
    a small prefix (they are pure restructurings of the same arithmetic,
    checked exhaustively by their own test suite).
    """
    report = VerificationReport(tolerance=tolerance)
    cases = {}
    for desc in descriptors or ():
        cases.setdefault((desc.element, desc.problem), []).append(desc)
    if not cases:
        cases = {
            (e, p): list(case_descriptors(e, p))
            for e in ElementType
            for p in ProblemClass
        }

    rng = np.random.default_rng(seed)
    for (element, problem), descs in sorted(
        cases.items(), key=lambda kv: (kv[0][0].value, kv[0][1].value)
    ):
        elements = [
            (random_geometry(element, rng), random_coefficients(problem, element, rng))
            for _ in range(per_case)
        ]
        reference = [integrate_reference(g, c) for g, c in elements]
        case = CaseReport(element, problem, per_case, 0.0)

        scalar_checks = min(per_case, 16)
        for desc in descs:
            for i in range(scalar_checks):
                got = integrate_element(desc, *elements[i])
                err = max(
                    relative_difference(got.A, reference[i].A),
                    relative_difference(got.b, reference[i].b),
                )
                case.max_rel_err = max(case.max_rel_err, err)
                if err > tolerance:
                    case.failures.append(
                        f"{desc.short_name()} element {i}: rel err {err:.2e}"
                    )
            batch = build_batch(elements)
            result = integrate_batch(desc, batch)
            for i in range(per_case):
                got = result.element_matrix(i)
                err = max(
                    relative_difference(got.A, reference[i].A),
                    relative_difference(got.b, reference[i].b),
                )
                case.max_rel_err = max(case.max_rel_err, err)
                if err > tolerance:
                    case.failures.append(
                        f"{desc.short_name()} batch element {i}: rel err {err:.2e}"
                    )
        report.cases.append(case)
    return report
