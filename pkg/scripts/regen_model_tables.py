#!/usr/bin/env python3
"""Regenerate the cost-model tables from the built-in constants.

Prints, for every (variant, element, problem) combination: global
accesses, operation count, phase breakdown and arithmetic intensity,
then the limiting intensities and per-element time bounds for the three
built-in processor profiles.  Everything here is model output; nothing
is measured.
"""

from feklab.kernels import phase_op_counts
from feklab.perfmodel import (
    BUILTIN_PROFILES,
    kernel_cost,
    limiting_intensity,
    memory_requirements,
    time_bound,
)
from feklab.problems import KernelDescriptor, ProblemClass, Variant, natural_path
from feklab.refelem import ElementType

CASES = [
    (e, p)
    for p in (ProblemClass.POISSON, ProblemClass.CONV_DIFF)
    for e in (ElementType.TETRAHEDRON, ElementType.PRISM)
]


def descriptors():
    for variant in Variant:
        for element, problem in CASES:
            yield KernelDescriptor(variant, natural_path(element), problem, element)


def main() -> None:
    print("== memory requirements (scalar counts per element) ==")
    header = "case            geom coeff  A^e  b^e  qss_pt qss_all ssq_all"
    print(header)
    for element, problem in CASES:
        desc = KernelDescriptor(Variant.QSS, natural_path(element), problem, element)
        req = memory_requirements(desc)
        print(
            f"{element.value:>5}/{problem.value:<9} {req.geometry_input:4d}"
            f" {req.coefficients_input:5d} {req.stiffness_output:4d} {req.load_output:4d}"
            f" {req.qss_point_total:7d} {req.qss_allpoints_total:7d} {req.ssq_total:7d}"
        )

    print("\n== accesses / operations / intensity ==")
    print("kernel                        accesses     ops  (geo+jac+shape+final)  intensity")
    for desc in descriptors():
        cost = kernel_cost(desc)
        ph = phase_op_counts(desc)
        phases = f"{ph.geo_derivs}+{ph.jacobian_terms}+{ph.shape_derivs}+{ph.final_update}"
        print(
            f"{desc.short_name():<28} {cost.global_accesses:8d} {cost.op_count:7d}"
            f"  {phases:>21}  {cost.arithmetic_intensity:9d}"
        )

    print("\n== per-element time bounds [ns] ==")
    for key, profile in BUILTIN_PROFILES.items():
        print(
            f"\n{profile.name} (limiting intensity peak {limiting_intensity(profile)}, "
            f"benchmark {limiting_intensity(profile, use_benchmark=True)})"
        )
        for variant in Variant:
            cells = []
            for element, problem in CASES:
                desc = KernelDescriptor(variant, natural_path(element), problem, element)
                cells.append(f"{time_bound(desc, profile):8.2f}")
            print(f"  {variant.value}: " + " ".join(cells))


if __name__ == "__main__":
    main()
