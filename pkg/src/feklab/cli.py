"""Command-line driver: verify, bench, tune, model, genmesh.

Exit codes: 0 ok, 1 verification failure, 2 bad arguments, 3 degenerate
mesh.  ``bench`` and ``tune`` run the oracle-equivalence gate before
reporting; ``--no-verify`` skips it but marks all output UNVERIFIED.
"""

from __future__ import annotations

import argparse
import sys

from .bench import default_worker_counts, format_records, run_benchmark, tune
from .errors import CounterMismatch, GeometryError
from .layout import (
    BatchLayout,
    LANE_WIDTHS,
    LayoutKind,
    read_batch,
    write_batch,
)
from .mesh import generate_mesh, spec_for_element_count
from .perfmodel import (
    BUILTIN_PROFILES,
    kernel_cost,
    limiting_intensity,
    parse_profile_file,
    time_bound,
)
from .problems import (
    GeometryPath,
    KernelDescriptor,
    ProblemClass,
    Variant,
    natural_path,
)
from .refelem import ElementType
from .verify import run_verification

_ELEMENTS = {"tet": ElementType.TETRAHEDRON, "prism": ElementType.PRISM}
_PROBLEMS = {"poisson": ProblemClass.POISSON, "convdiff": ProblemClass.CONV_DIFF}
_VARIANTS = {v.value: v for v in Variant}
_GEOS = {g.value: g for g in GeometryPath}
_LAYOUTS = {k.value: k for k in LayoutKind}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--element", choices=sorted(_ELEMENTS), default="tet")
    parser.add_argument("--problem", choices=sorted(_PROBLEMS), default="poisson")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", metavar="FILE", default=None)


def _add_kernel_selection(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--variant", choices=sorted(_VARIANTS), default="qss")
    parser.add_argument(
        "--geo",
        choices=sorted(_GEOS),
        default=None,
        help="Jacobian path (default: linear for tet, generic for prism)",
    )


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--layout", choices=sorted(_LAYOUTS), default="major")
    parser.add_argument("--lane-width", type=int, choices=LANE_WIDTHS, default=1)
    parser.add_argument(
        "--workers",
        type=int,
        default=None,
        help="worker threads (bench: default 1; tune: sweeps {1, cores, 2*cores} "
        "when omitted, {1, N} when given)",
    )
    parser.add_argument("--elements", type=int, default=100_000)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--profile", metavar="FILE", default=None)
    parser.add_argument(
        "--processor",
        choices=sorted(BUILTIN_PROFILES),
        default="k20m",
        help="built-in processor profile (ignored when --profile is given)",
    )
    parser.add_argument("--format", choices=("csv", "table"), default="table")
    parser.add_argument("--batch", metavar="FILE", default=None,
                        help="read the element batch from a genmesh file")
    parser.add_argument("--no-verify", action="store_true",
                        help="skip the correctness gate (output marked UNVERIFIED)")


def _descriptor(args) -> KernelDescriptor:
    element = _ELEMENTS[args.element]
    geo = _GEOS[args.geo] if args.geo else natural_path(element)
    try:
        return KernelDescriptor(_VARIANTS[args.variant], geo, _PROBLEMS[args.problem], element)
    except ValueError as exc:
        raise _BadArguments(str(exc)) from exc


def _profile(args):
    if args.profile:
        return parse_profile_file(args.profile)
    return BUILTIN_PROFILES[args.processor]


def _layout(args) -> BatchLayout:
    kind = _LAYOUTS[args.layout]
    width = args.lane_width if kind is LayoutKind.LANE_INTERLEAVED else 1
    return BatchLayout(kind, width)


def _load_or_generate_batch(args, desc: KernelDescriptor):
    if args.batch:
        batch = read_batch(args.batch)
        if batch.element_type is not desc.element or batch.problem is not desc.problem:
            raise _BadArguments(
                f"batch file holds ({batch.element_type.value}, {batch.problem.value}), "
                f"selection is ({desc.element.value}, {desc.problem.value})"
            )
        return batch
    spec = spec_for_element_count(desc.element, args.elements)
    return generate_mesh(spec, args.seed, desc.problem, _layout(args))


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


class _BadArguments(Exception):
    pass


def _gate(args, desc: KernelDescriptor) -> bool:
    """Run the correctness gate; returns True when results are verified."""
    if args.no_verify:
        print("WARNING: correctness gate skipped; output is UNVERIFIED", file=sys.stderr)
        return False
    report = run_verification(per_case=50, seed=args.seed + 1, descriptors=[desc])
    if not report.passed:
        for line in report.summary_lines():
            print(line, file=sys.stderr)
        raise _VerificationFailed("correctness gate failed")
    return True


class _VerificationFailed(Exception):
    pass


def _cmd_verify(args) -> int:
    descriptors = None
    report = run_verification(per_case=args.elements, seed=args.seed, descriptors=descriptors)
    lines = report.summary_lines()
    lines.append(
        f"verification {'PASSED' if report.passed else 'FAILED'} "
        f"(tolerance {report.tolerance:.1e}, max rel err {report.max_rel_err:.2e})"
    )
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if report.passed else 1


def _cmd_bench(args) -> int:
    desc = _descriptor(args)
    verified = _gate(args, desc)
    batch = _load_or_generate_batch(args, desc)
    record = run_benchmark(
        batch,
        desc,
        _profile(args),
        layout=_layout(args),
        workers=args.workers or 1,
        repeats=args.repeats,
        verified=verified,
    )
    _emit(format_records([record], args.format, unverified=not verified), args.out)
    return 0


def _cmd_tune(args) -> int:
    desc = _descriptor(args)
    verified = _gate(args, desc)
    batch = _load_or_generate_batch(args, desc)
    if args.workers is None:
        worker_counts = default_worker_counts()
    else:
        worker_counts = tuple(sorted({1, args.workers}))
    best, records = tune(
        batch,
        desc,
        _profile(args),
        worker_counts=worker_counts,
        repeats=args.repeats,
        verified=verified,
    )
    text = format_records(records, args.format, unverified=not verified)
    if args.format == "table":
        text += (
            f"best: {best.layout.kind.value} lane_width={best.layout.lane_width} "
            f"workers={best.worker_count} ({best.ns_per_element:.3f} ns/element)\n"
        )
    else:
        print(
            f"best: {best.layout.kind.value} lane_width={best.layout.lane_width} "
            f"workers={best.worker_count}",
            file=sys.stderr,
        )
    _emit(text, args.out)
    return 0


def _cmd_model(args) -> int:
    profile = _profile(args)
    lines = []
    lines.append(f"profile: {profile.name}")
    lines.append(
        f"limiting intensity: peak {limiting_intensity(profile)} / "
        f"benchmark {limiting_intensity(profile, use_benchmark=True)} ops per access"
    )
    header = ("variant", "element", "problem", "accesses", "ops", "intensity", "bound_ns")
    rows = []
    for variant in Variant:
        for element in ElementType:
            for problem in ProblemClass:
                desc = KernelDescriptor(variant, natural_path(element), problem, element)
                cost = kernel_cost(desc)
                rows.append(
                    (
                        variant.value,
                        element.value,
                        problem.value,
                        str(cost.global_accesses),
                        str(cost.op_count),
                        str(cost.arithmetic_intensity),
                        f"{time_bound(desc, profile):.2f}",
                    )
                )
    if args.format == "csv":
        body = [",".join(header)] + [",".join(r) for r in rows]
        _emit("\n".join(body) + "\n", args.out)
    else:
        widths = [max(len(header[i]), max(len(r[i]) for r in rows)) for i in range(len(header))]
        table = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
        table += ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in rows]
        _emit("\n".join(lines + table) + "\n", args.out)
    return 0


def _cmd_genmesh(args) -> int:
    if not args.out:
        raise _BadArguments("genmesh requires --out FILE")
    element = _ELEMENTS[args.element]
    problem = _PROBLEMS[args.problem]
    spec = spec_for_element_count(element, args.elements)
    batch = generate_mesh(spec, args.seed, problem, _layout(args), pad_value=0.0)
    write_batch(batch, args.out)
    print(
        f"wrote {batch.n_elements} {element.value} elements "
        f"({problem.value}, {batch.layout.kind.value}) to {args.out}",
        file=sys.stderr,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="feklab",
        description="element integration kernel lab: verification, timing, tuning "
        "and roofline model reporting",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run the oracle-equivalence suite")
    _add_common(p_verify)
    p_verify.add_argument(
        "--elements", type=int, default=200, help="random elements per case"
    )
    p_verify.set_defaults(func=_cmd_verify)

    for name, func, help_text in (
        ("bench", _cmd_bench, "time one kernel configuration"),
        ("tune", _cmd_tune, "exhaustive layout/lane-width/worker sweep"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        _add_kernel_selection(p)
        _add_run_options(p)
        p.set_defaults(func=func)

    p_model = sub.add_parser("model", help="print cost-model tables")
    _add_common(p_model)
    p_model.add_argument("--profile", metavar="FILE", default=None)
    p_model.add_argument(
        "--processor", choices=sorted(BUILTIN_PROFILES), default="k20m"
    )
    p_model.add_argument("--format", choices=("csv", "table"), default="table")
    p_model.set_defaults(func=_cmd_model)

    p_gen = sub.add_parser("genmesh", help="write a reproducible batch file")
    _add_common(p_gen)
    p_gen.add_argument("--elements", type=int, default=100_000)
    p_gen.add_argument("--layout", choices=sorted(_LAYOUTS), default="major")
    p_gen.add_argument("--lane-width", type=int, choices=LANE_WIDTHS, default=1)
    p_gen.set_defaults(func=_cmd_genmesh)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _BadArguments as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _VerificationFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CounterMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except GeometryError as exc:
        print(f"error: degenerate mesh: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
