"""Roofline cost model for the integration kernels.

For a kernel characterized by its global memory accesses and operation
count per element, and a processor characterized by bandwidth and
double-precision throughput, the per-element execution time is bounded
below by

    max( accesses * 8 bytes / bandwidth ,  operations / throughput ).

Benchmark figures (STREAM bandwidth, DGEMM throughput) feed the time
bound; peak figures serve the limiting-intensity classification.  The
limiting arithmetic intensity of a processor is throughput divided by
the double-access rate (bandwidth / 8): kernels below it are memory
bound, kernels above it pipeline bound.

Reported precision follows the model tables: intensities as integers,
times rounded to 0.01 ns, efficiencies as integer percent.

Shared-memory/cache traffic is tracked in the memory-requirement tables
but deliberately excluded from the time bound.
"""

from __future__ import annotations

from dataclasses import dataclass

from .kernels.counts import OP_TOTALS, access_breakdown, global_accesses
from .problems import KernelDescriptor, ProblemClass, Variant
from .refelem import ElementType

BYTES_PER_ACCESS = 8  # double precision throughout


@dataclass(frozen=True)
class ProcessorProfile:
    """Peak and benchmark throughput/bandwidth of one processor."""

    name: str
    peak_dp_tflops: float
    peak_bandwidth_gbs: float
    bench_dp_tflops: float
    bench_bandwidth_gbs: float

    def __post_init__(self):
        values = (
            self.peak_dp_tflops,
            self.peak_bandwidth_gbs,
            self.bench_dp_tflops,
            self.bench_bandwidth_gbs,
        )
        if any(v <= 0 for v in values):
            raise ValueError(f"profile {self.name!r}: all figures must be positive")
        if self.bench_dp_tflops > 1.05 * self.peak_dp_tflops:
            raise ValueError(f"profile {self.name!r}: benchmark flops exceed peak")
        if self.bench_bandwidth_gbs > 1.05 * self.peak_bandwidth_gbs:
            raise ValueError(f"profile {self.name!r}: benchmark bandwidth exceeds peak")


# The three processors the model tables were built for.  The two-socket
# Xeon pair is treated as a single device (peak 2 x 0.096 TFlops,
# 2 x 42.6 GB/s).
BUILTIN_PROFILES: dict[str, ProcessorProfile] = {
    "k20m": ProcessorProfile("Tesla K20m", 1.17, 208.0, 1.10, 144.0),
    "xeon-phi": ProcessorProfile("Xeon Phi 5110P", 1.01, 320.0, 0.84, 171.0),
    "xeon-e5": ProcessorProfile("Xeon E5-2620 x2", 0.192, 85.2, 0.18, 67.0),
}


@dataclass(frozen=True)
class KernelCost:
    """Per-element access count, operation count and arithmetic intensity."""

    global_accesses: int
    op_count: int
    arithmetic_intensity: int  # rounded ops per access


def kernel_cost(desc: KernelDescriptor) -> KernelCost:
    accesses = global_accesses(desc.element, desc.problem)
    ops = OP_TOTALS[(desc.variant, desc.element, desc.problem)]
    return KernelCost(accesses, ops, round(ops / accesses))


def limiting_intensity(profile: ProcessorProfile, use_benchmark: bool = False) -> int:
    """Ops per double access separating memory- from pipeline-bound kernels."""
    if use_benchmark:
        flops, bw = profile.bench_dp_tflops, profile.bench_bandwidth_gbs
    else:
        flops, bw = profile.peak_dp_tflops, profile.peak_bandwidth_gbs
    return round((flops * 1e12) / (bw * 1e9 / BYTES_PER_ACCESS))


def time_bound(desc: KernelDescriptor, profile: ProcessorProfile) -> float:
    """Roofline lower bound on execution time, in ns per element.

    Uses the benchmark (STREAM / DGEMM) figures; shared-memory traffic is
    not part of the bound.
    """
    cost = kernel_cost(desc)
    memory_ns = cost.global_accesses * BYTES_PER_ACCESS / profile.bench_bandwidth_gbs
    flop_ns = cost.op_count / (profile.bench_dp_tflops * 1e3)
    return max(memory_ns, flop_ns)


def is_memory_bound(
    desc: KernelDescriptor, profile: ProcessorProfile, use_benchmark: bool = True
) -> bool:
    return kernel_cost(desc).arithmetic_intensity < limiting_intensity(
        profile, use_benchmark
    )


def efficiency(measured_ns: float, bound_ns: float) -> int:
    """Achieved percentage of the bound, as integer percent."""
    if measured_ns <= 0 or bound_ns <= 0:
        raise ValueError("times must be positive")
    return round(bound_ns / measured_ns * 100.0)


# shared-memory staging accesses (QSS kernels), per candidate array placement
_SHARED_QSS = {
    "geometry": {ElementType.TETRAHEDRON: 12, ElementType.PRISM: 108},
    "coefficients": {
        (ElementType.TETRAHEDRON, ProblemClass.POISSON): 4,
        (ElementType.PRISM, ProblemClass.POISSON): 6,
        (ElementType.TETRAHEDRON, ProblemClass.CONV_DIFF): 80,
        (ElementType.PRISM, ProblemClass.CONV_DIFF): 120,
    },
    "shape": {ElementType.TETRAHEDRON: 60, ElementType.PRISM: 210},
    "output": {ElementType.TETRAHEDRON: 180, ElementType.PRISM: 546},
}


def shared_memory_accesses(desc: KernelDescriptor) -> dict[str, int]:
    """Auxiliary shared-memory accesses per array placement (QSS model).

    Reported for completeness; never part of :func:`time_bound`.
    """
    e, p = desc.element, desc.problem
    return {
        "geometry": _SHARED_QSS["geometry"][e],
        "coefficients": _SHARED_QSS["coefficients"][(e, p)],
        "shape": _SHARED_QSS["shape"][e],
        "output": _SHARED_QSS["output"][e],
    }


@dataclass(frozen=True)
class MemoryRequirements:
    """Scalar counts of the arrays a kernel touches.

    The input/output block is variant independent.  The working-set
    blocks mirror the storage strategies: QSS keeps either one point's or
    all points' coefficient/basis data plus the whole output; SSQ keeps
    all points' coefficients, the two basis functions of the current
    entry, and a single output entry pair.  The SQS figure is a derived
    in-between (one output row plus single-point data).
    """

    n_shape: int
    n_quad: int
    integration_data: int
    geometry_input: int
    coefficients_input: int
    stiffness_output: int
    load_output: int
    qss_point_coefficients: int
    qss_point_shape: int
    qss_point_total: int
    qss_allpoints_coefficients: int
    qss_allpoints_shape: int
    qss_allpoints_total: int
    ssq_coefficients: int
    ssq_shape: int
    ssq_total: int
    sqs_row_total: int
    working_set_total: int


# basis values + derivatives held for all points: per-point data times n_quad
# for prisms; for tetrahedra the derivatives are element constants, so the
# count collapses to n_quad*n_shape values + 3*n_shape derivatives.
def _allpoints_shape(element: ElementType) -> int:
    n_s, n_q = element.n_shape, element.n_quad
    if element is ElementType.TETRAHEDRON:
        return n_q * n_s + 3 * n_s
    return n_q * 4 * n_s


def memory_requirements(desc: KernelDescriptor) -> MemoryRequirements:
    element, problem = desc.element, desc.problem
    n_s, n_q = element.n_shape, element.n_quad
    geometry, coefficients, a_out, b_out = access_breakdown(element, problem)
    integration_data = 4 * n_q  # local point coordinates + weight
    point_coeff = 1 if problem is ProblemClass.POISSON else 20
    point_shape = 4 * n_s
    output = a_out + b_out
    qss_point_total = output + point_coeff + point_shape
    all_coeff = coefficients
    all_shape = _allpoints_shape(element)
    qss_all_total = output + all_coeff + all_shape
    ssq_shape = 2 * 4  # the two basis functions of the current entry
    ssq_total = 2 + all_coeff + ssq_shape  # one stiffness entry + one load entry
    sqs_row_total = n_s + 1 + point_coeff + point_shape
    working = {
        Variant.QSS: qss_all_total,
        Variant.SQS: sqs_row_total,
        Variant.SSQ: ssq_total,
    }[desc.variant]
    return MemoryRequirements(
        n_shape=n_s,
        n_quad=n_q,
        integration_data=integration_data,
        geometry_input=geometry,
        coefficients_input=coefficients,
        stiffness_output=a_out,
        load_output=b_out,
        qss_point_coefficients=point_coeff,
        qss_point_shape=point_shape,
        qss_point_total=qss_point_total,
        qss_allpoints_coefficients=all_coeff,
        qss_allpoints_shape=all_shape,
        qss_allpoints_total=qss_all_total,
        ssq_coefficients=all_coeff,
        ssq_shape=ssq_shape,
        ssq_total=ssq_total,
        sqs_row_total=sqs_row_total,
        working_set_total=working,
    )


_PROFILE_KEYS = {
    "peak_dp_tflops",
    "peak_bw_gbs",
    "bench_dp_tflops",
    "bench_bw_gbs",
}


def parse_profile_file(path) -> ProcessorProfile:
    """Read a plain key-value profile file.

    Expected keys: name, peak_dp_tflops, peak_bw_gbs, bench_dp_tflops,
    bench_bw_gbs.  Lines starting with '#' and blank lines are ignored;
    separators '=' or ':' both work.
    """
    entries: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            sep = "=" if "=" in line else (":" if ":" in line else None)
            if sep is None:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split(sep, 1))
            entries[key] = value
    missing = ({"name"} | _PROFILE_KEYS) - entries.keys()
    if missing:
        raise ValueError(f"{path}: missing profile keys: {sorted(missing)}")
    return ProcessorProfile(
        name=entries["name"],
        peak_dp_tflops=float(entries["peak_dp_tflops"]),
        peak_bandwidth_gbs=float(entries["peak_bw_gbs"]),
        bench_dp_tflops=float(entries["bench_dp_tflops"]),
        bench_bandwidth_gbs=float(entries["bench_bw_gbs"]),
    )
