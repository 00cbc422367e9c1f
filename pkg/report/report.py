#!/usr/bin/env python3
"""Chart generator for kernel benchmark CSV files.

Reads the benchmark CLI's CSV output and renders grouped bar charts as
static SVG/PNG: per-case execution times, achieved GB/s, achieved
GFLOPS, or percent-of-bound efficiency.  The x-axis groups the four
(element, problem) cases; bars within a group are the loop-order
variants.  When several rows share a (case, variant) pair, the fastest
row represents it.

Usage:
    report.py --input runs.csv --kind {time|bandwidth|flops|efficiency} --out chart.svg
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

EXPECTED_COLUMNS = (
    "variant",
    "geo",
    "element",
    "problem",
    "layout",
    "lane_width",
    "workers",
    "n_elements",
    "ns_per_element",
    "ns_mad",
    "accesses_per_element",
    "ops_model",
    "intensity",
    "bound_ns",
    "efficiency_pct",
)

KINDS = ("time", "bandwidth", "flops", "efficiency")

BYTES_PER_ACCESS = 8


class SchemaError(Exception):
    """CSV input does not match the benchmark schema."""


class EmptySelection(Exception):
    """No rows to chart."""


@dataclass(frozen=True)
class Run:
    variant: str
    geo: str
    element: str
    problem: str
    layout: str
    lane_width: int
    workers: int
    n_elements: int
    ns_per_element: float
    ns_mad: float
    accesses_per_element: float
    ops_model: int
    intensity: int
    bound_ns: float
    efficiency_pct: int

    @property
    def case(self) -> str:
        return f"{self.element}/{self.problem}"

    def value(self, kind: str) -> float:
        """The charted quantity for this run.

        bandwidth: accesses * 8 bytes / (ns per element) = GB/s;
        flops: model ops / (ns per element) = GFLOPS;
        time/efficiency: the stored column.
        """
        if kind == "time":
            return self.ns_per_element
        if kind == "bandwidth":
            return self.accesses_per_element * BYTES_PER_ACCESS / self.ns_per_element
        if kind == "flops":
            return self.ops_model / self.ns_per_element
        if kind == "efficiency":
            return float(self.efficiency_pct)
        raise ValueError(f"unknown chart kind {kind!r}")


_PARSERS = {
    "lane_width": int,
    "workers": int,
    "n_elements": int,
    "ns_per_element": float,
    "ns_mad": float,
    "accesses_per_element": float,
    "ops_model": int,
    "intensity": int,
    "bound_ns": float,
    "efficiency_pct": int,
}


def load_runs(csv_path) -> list[Run]:
    """Parse a benchmark CSV into typed rows.

    Raises SchemaError naming the offending column (and the 1-based line
    number for value errors).  Comment lines starting with '#' are
    skipped; an empty data section yields an empty list.
    """
    with open(csv_path, "r", encoding="utf-8", newline="") as fh:
        numbered = (
            (lineno, line)
            for lineno, line in enumerate(fh, start=1)
            if line.strip() and not line.startswith("#")
        )
        try:
            header_lineno, header_line = next(numbered)
        except StopIteration:
            raise SchemaError(f"{csv_path}: no header row") from None
        header = next(csv.reader([header_line]))
        missing = [col for col in EXPECTED_COLUMNS if col not in header]
        if missing:
            raise SchemaError(
                f"{csv_path}:{header_lineno}: missing column {missing[0]!r}"
            )
        runs = []
        for lineno, line in numbered:
            fields = next(csv.reader([line]))
            if len(fields) != len(header):
                raise SchemaError(
                    f"{csv_path}:{lineno}: expected {len(header)} fields, "
                    f"got {len(fields)}"
                )
            record = dict(zip(header, fields))
            kwargs = {}
            for col in EXPECTED_COLUMNS:
                raw = record[col]
                parse = _PARSERS.get(col, str)
                try:
                    kwargs[col] = parse(raw)
                except ValueError:
                    raise SchemaError(
                        f"{csv_path}:{lineno}: column {col!r}: "
                        f"cannot parse {raw!r} as {parse.__name__}"
                    ) from None
            runs.append(Run(**kwargs))
    return runs


AXIS_LABELS = {
    "time": "ns per element",
    "bandwidth": "GB/s",
    "flops": "GFLOPS",
    "efficiency": "% of bound",
}

CASE_ORDER = ("tet/poisson", "prism/poisson", "tet/convdiff", "prism/convdiff")


def select_best(runs: list[Run]) -> dict[tuple[str, str], Run]:
    """Fastest run per (case, variant) pair."""
    best: dict[tuple[str, str], Run] = {}
    for run in runs:
        key = (run.case, run.variant)
        if key not in best or run.ns_per_element < best[key].ns_per_element:
            best[key] = run
    return best


def chart(runs: list[Run], kind: str, out_path) -> dict[str, dict[str, float]]:
    """Render a grouped bar chart and return the plotted values.

    Returns {variant: {case: value}} so callers (and tests) can read the
    chart data without scraping the image.
    """
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    if not runs:
        raise EmptySelection("no runs to chart")
    best = select_best(runs)
    variants = sorted({variant for _, variant in best})
    cases = [c for c in CASE_ORDER if any(case == c for case, _ in best)]
    cases += sorted({case for case, _ in best} - set(cases))

    data: dict[str, dict[str, float]] = {
        variant: {
            case: best[(case, variant)].value(kind)
            for case in cases
            if (case, variant) in best
        }
        for variant in variants
    }

    fig, ax = plt.subplots(figsize=(1.8 + 1.6 * len(cases), 4.0))
    width = 0.8 / len(variants)
    for i, variant in enumerate(variants):
        xs, ys = [], []
        for j, case in enumerate(cases):
            if case in data[variant]:
                xs.append(j + (i - (len(variants) - 1) / 2) * width)
                ys.append(data[variant][case])
        ax.bar(xs, ys, width=width, label=variant)
    ax.set_xticks(range(len(cases)))
    ax.set_xticklabels(cases, rotation=15)
    ax.set_ylabel(AXIS_LABELS[kind])
    ax.set_title(f"{kind} per (element, problem) case")
    ax.legend(title="variant")
    if kind == "time":
        ax.set_yscale("log")
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return data


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="render benchmark CSV results as a grouped bar chart"
    )
    parser.add_argument("--input", required=True, metavar="runs.csv")
    parser.add_argument("--kind", choices=KINDS, required=True)
    parser.add_argument("--out", required=True, metavar="chart.svg")
    args = parser.parse_args(argv)
    try:
        runs = load_runs(args.input)
        chart(runs, args.kind, args.out)
    except (SchemaError, EmptySelection, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
