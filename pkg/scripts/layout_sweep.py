#!/usr/bin/env python3
"""End-to-end layout/variant sweep over all four (element, problem) cases.

Generates a synthetic mesh per case, verifies the kernels against the
reference integrator, times every variant in every storage layout, and
writes one combined CSV suitable for report/report.py charting.

Usage: layout_sweep.py [--elements N] [--repeats R] [--out sweep.csv]
"""

import argparse
import sys

from feklab.bench import CSV_COLUMNS, default_worker_counts, tune
from feklab.mesh import generate_mesh, spec_for_element_count
from feklab.perfmodel import BUILTIN_PROFILES
from feklab.problems import KernelDescriptor, ProblemClass, Variant, natural_path
from feklab.refelem import ElementType
from feklab.verify import run_verification


def main(argv=None) -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--elements", type=int, default=20_000)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--processor", default="xeon-e5", choices=sorted(BUILTIN_PROFILES))
    parser.add_argument("--out", default="sweep.csv")
    args = parser.parse_args(argv)

    report = run_verification(per_case=50)
    if not report.passed:
        print("\n".join(report.summary_lines()), file=sys.stderr)
        return 1

    profile = BUILTIN_PROFILES[args.processor]
    rows = [",".join(CSV_COLUMNS)]
    for element in ElementType:
        batch_spec = spec_for_element_count(element, args.elements)
        for problem in ProblemClass:
            batch = generate_mesh(batch_spec, 0, problem)
            for variant in Variant:
                desc = KernelDescriptor(variant, natural_path(element), problem, element)
                best, records = tune(
                    batch,
                    desc,
                    profile,
                    worker_counts=default_worker_counts(),
                    repeats=args.repeats,
                )
                rows.extend(",".join(r.csv_row()) for r in records)
                print(
                    f"{desc.short_name():<28} best {best.ns_per_element:10.1f} ns/element "
                    f"({best.layout.kind.value}, w={best.layout.lane_width}, "
                    f"workers={best.worker_count})",
                    file=sys.stderr,
                )
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(rows) + "\n")
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
