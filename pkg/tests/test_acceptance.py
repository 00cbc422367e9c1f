"""Acceptance suite: one test per release criterion.

Each test prints a ``ACCEPTANCE <name>: PASS`` line on success (visible
with ``pytest -s`` or in the captured output of a failing run).  The
randomized corpora are seeded and shared across criteria through a
module-scoped fixture.
"""

import time

import numpy as np
import pytest

from feklab.bench import CSV_COLUMNS
from feklab.cli import main
from feklab.geometry import ElementGeometry
from feklab.kernels import integrate_batch, phase_op_counts
from feklab.layout import BatchLayout, LayoutKind, build_batch
from feklab.oracle import integrate_high_order, integrate_reference, simplex_exact
from feklab.perfmodel import (
    BUILTIN_PROFILES,
    efficiency,
    kernel_cost,
    limiting_intensity,
    time_bound,
)
from feklab.problems import (
    CoefficientSet,
    GeometryPath,
    KernelDescriptor,
    ProblemClass,
    Variant,
    case_descriptors,
    natural_path,
)
from feklab.refelem import ElementType, shape_at
from feklab.verify import (
    random_coefficients,
    random_geometry,
    random_prism_geometry,
    random_tet_geometry,
)

TET = ElementType.TETRAHEDRON
PRISM = ElementType.PRISM
POISSON = ProblemClass.POISSON
CONVDIFF = ProblemClass.CONV_DIFF
CASES = ((TET, POISSON), (PRISM, POISSON), (TET, CONVDIFF), (PRISM, CONVDIFF))

CORPUS_SIZE = 1000
SEED = 987654321


def _passed(name: str) -> None:
    print(f"ACCEPTANCE {name}: PASS")


def _per_element_rel(diff_source, reference) -> np.ndarray:
    """Per-element relative Frobenius difference of (n, ...) stacks."""
    axes = tuple(range(1, diff_source.ndim))
    diff = np.sqrt(((diff_source - reference) ** 2).sum(axis=axes))
    ref = np.sqrt((reference**2).sum(axis=axes))
    ref[ref == 0.0] = 1.0
    return diff / ref


@pytest.fixture(scope="module")
def corpora():
    """Seeded 1000-element corpus, batch results and timings per case."""
    rng = np.random.default_rng(SEED)
    data = {}
    for element, problem in CASES:
        t0 = time.perf_counter()
        elements = [
            (random_geometry(element, rng), random_coefficients(problem, element, rng))
            for _ in range(CORPUS_SIZE)
        ]
        batch = build_batch(elements)
        gen_seconds = time.perf_counter() - t0

        t0 = time.perf_counter()
        results = {
            desc: integrate_batch(desc, batch)
            for desc in case_descriptors(element, problem)
        }
        integrate_seconds = time.perf_counter() - t0
        data[(element, problem)] = {
            "elements": elements,
            "results": results,
            "gen_seconds": gen_seconds,
            "integrate_seconds": integrate_seconds,
        }
    return data


def test_cross_variant_equivalence(corpora):
    elapsed = 0.0
    for case, bundle in corpora.items():
        elapsed += bundle["gen_seconds"] + bundle["integrate_seconds"]
        results = list(bundle["results"].items())
        t0 = time.perf_counter()
        for i in range(len(results)):
            for j in range(i + 1, len(results)):
                desc_i, res_i = results[i]
                desc_j, res_j = results[j]
                rel_a = _per_element_rel(res_i.stiffness, res_j.stiffness)
                rel_b = _per_element_rel(res_i.load, res_j.load)
                worst = max(rel_a.max(), rel_b.max())
                assert worst < 1e-12, (desc_i, desc_j, worst)
        elapsed += time.perf_counter() - t0
    assert elapsed < 10.0, f"cross-variant criterion took {elapsed:.1f} s"
    _passed(f"cross-variant equivalence ({elapsed:.1f} s)")


def test_oracle_equivalence(corpora):
    for case, bundle in corpora.items():
        reference_a = np.empty_like(next(iter(bundle["results"].values())).stiffness)
        reference_b = np.empty_like(next(iter(bundle["results"].values())).load)
        for i, (geom, coeff) in enumerate(bundle["elements"]):
            ref = integrate_reference(geom, coeff)
            reference_a[i] = ref.A
            reference_b[i] = ref.b
        for desc, res in bundle["results"].items():
            worst = max(
                _per_element_rel(res.stiffness, reference_a).max(),
                _per_element_rel(res.load, reference_b).max(),
            )
            assert worst < 1e-12, (desc, worst)
    _passed("oracle equivalence (generic reference)")


def test_oracle_equivalence_twisted_prisms():
    # Twisted prisms make the integrand rational, so the production rule
    # is no longer exact and its result drifts from the converged one as
    # the twist grows.  A convergence study of the drift (quadratic in
    # the twist size for in-plane face twists, with the worst constant
    # over 40 conditioned random prisms) fixes 3e-6 as a twist that keeps
    # every kernel within 1e-10 of the level-4 refined rule with a ~40x
    # margin, while det J still varies across the quadrature points far
    # above roundoff.
    rng = np.random.default_rng(SEED + 1)
    twist = 3e-6
    checked = 0
    for _ in range(12):
        ref = PRISM.reference_vertices.copy()
        ref[:, :2] += rng.uniform(-1.0, 1.0, size=(6, 2)) * twist
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        if np.linalg.det(q) < 0:
            q[:, 0] = -q[:, 0]
        linear = q @ np.diag(rng.uniform(0.5, 2.0, size=3))
        geom = ElementGeometry(PRISM, ref @ linear.T + rng.uniform(-1, 1, size=3))
        coeffs = [
            random_coefficients(CONVDIFF, PRISM, rng),
            CoefficientSet.poisson(np.full(6, rng.uniform(0.5, 2.0))),
        ]
        for coeff in coeffs:
            oracle = integrate_high_order(geom, coeff, level=4)
            batch = build_batch([(geom, coeff)])
            for desc in case_descriptors(PRISM, coeff.problem):
                got = integrate_batch(desc, batch).element_matrix(0)
                rel_a = np.linalg.norm(got.A - oracle.A) / np.linalg.norm(oracle.A)
                rel_b = np.linalg.norm(got.b - oracle.b) / np.linalg.norm(oracle.b)
                assert max(rel_a, rel_b) < 1e-10, (desc, max(rel_a, rel_b))
                checked += 1
    assert checked == 12 * 2 * 3
    _passed("oracle equivalence (twisted prisms vs refined rule)")


def test_analytic_spot_checks(unit_tet):
    gradients = np.array(
        [[-1.0, -1.0, -1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    )
    expected_a = gradients @ gradients.T / 6.0
    assert expected_a[0, 0] == 0.5 and expected_a[1, 1] == pytest.approx(1 / 6)
    mass = np.empty((4, 4))
    for r in range(4):
        for s in range(4):
            powers = [0, 0, 0, 0]
            powers[r] += 1
            powers[s] += 1
            mass[r, s] = simplex_exact(tuple(powers), unit_tet)
    reaction = np.zeros((4, 4))
    reaction[0, 0] = 1.0
    for desc in case_descriptors(TET, POISSON):
        got = integrate_batch(
            desc, build_batch([(unit_tet, CoefficientSet.poisson(np.zeros(4)))])
        ).element_matrix(0)
        assert np.abs(got.A - expected_a).max() < 1e-14, desc
    for desc in case_descriptors(TET, CONVDIFF):
        got = integrate_batch(
            desc,
            build_batch([(unit_tet, CoefficientSet.convdiff(reaction, np.zeros(4)))]),
        ).element_matrix(0)
        assert np.abs(got.A - mass).max() < 1e-14, desc
        assert abs(mass[0, 0] - 1 / 60) < 1e-16 and abs(mass[0, 1] - 1 / 120) < 1e-16
    _passed("analytic spot checks (stiffness + mass matrix)")


def _batch_from_arrays(element, problem, geometry_rows, coeff_rows):
    from feklab.layout import ElementBatch

    return ElementBatch.from_arrays(element, problem, geometry_rows, coeff_rows)


def test_structural_invariants():
    rng = np.random.default_rng(SEED + 2)
    n = CORPUS_SIZE

    # row-sum nullity: derivative-only coefficients annihilate constants
    for element in ElementType:
        geoms = [random_geometry(element, rng) for _ in range(n)]
        rows = np.stack([g.coords.reshape(-1) for g in geoms])
        c_rows = np.zeros((n, 20))
        c_block = rng.uniform(-1.0, 1.0, size=(n, 3, 3))
        full = np.zeros((n, 4, 4))
        full[:, 1:, 1:] = c_block
        c_rows[:, :16] = full.reshape(n, 16)
        batch = _batch_from_arrays(element, CONVDIFF, rows, c_rows)
        desc = KernelDescriptor(Variant.QSS, GeometryPath.GEO_GENERIC, CONVDIFF, element)
        res = integrate_batch(desc, batch)
        row_sums = np.abs(res.stiffness.sum(axis=2)).max(axis=1)
        norms = np.sqrt((res.stiffness**2).sum(axis=(1, 2)))
        assert (row_sums <= 1e-12 * norms).all()

        # symmetry: symmetric derivative block plus reaction term
        sym = c_block + np.transpose(c_block, (0, 2, 1))
        full = np.zeros((n, 4, 4))
        full[:, 1:, 1:] = sym
        full[:, 0, 0] = rng.uniform(-1.0, 1.0, size=n)
        c_rows[:, :16] = full.reshape(n, 16)
        c_rows[:, 16:] = rng.uniform(-1.0, 1.0, size=(n, 4))
        batch = _batch_from_arrays(element, CONVDIFF, rows, c_rows)
        res = integrate_batch(desc, batch)
        asym = _per_element_rel(res.stiffness, np.transpose(res.stiffness, (0, 2, 1)))
        assert asym.max() < 1e-12

    # affine scaling laws on tetrahedra: diffusion ~ h, reaction ~ h**3
    h = 1.7
    geoms = [random_tet_geometry(rng) for _ in range(n)]
    rows = np.stack([g.coords.reshape(-1) for g in geoms])
    desc = KernelDescriptor(Variant.QSS, GeometryPath.GEO_LINEAR, CONVDIFF, TET)
    for block, power in (((slice(1, 4), slice(1, 4)), 1.0), ((0, 0), 3.0)):
        c = np.zeros((4, 4))
        c[block] = 1.0 if block == (0, 0) else np.eye(3)
        c_rows = np.tile(np.concatenate([c.reshape(-1), np.zeros(4)]), (n, 1))
        res_small = integrate_batch(desc, _batch_from_arrays(TET, CONVDIFF, rows, c_rows))
        res_big = integrate_batch(
            desc, _batch_from_arrays(TET, CONVDIFF, rows * h, c_rows)
        )
        rel = _per_element_rel(res_big.stiffness, h**power * res_small.stiffness)
        assert rel.max() < 1e-12

    # partition of unity at random interior points
    for element, draw in ((TET, lambda: rng.dirichlet(np.ones(4))[:3]),
                          (PRISM, lambda: np.append(rng.dirichlet(np.ones(3))[:2],
                                                    rng.uniform(-1.0, 1.0)))):
        for _ in range(n):
            values, derivs = shape_at(element, draw())
            assert abs(values.sum() - 1.0) < 1e-14
            assert np.abs(derivs.sum(axis=0)).max() < 1e-14

    # volume conservation: quadrature volumes match exact volumes
    from feklab.geometry import jacobian_affine, jacobian_at_point
    from feklab.refelem import reference_element

    rule_t, _ = reference_element(TET)
    for _ in range(n):
        geom = random_tet_geometry(rng)
        exact = abs(np.linalg.det((geom.coords[1:] - geom.coords[0]).T)) / 6.0
        assert abs(jacobian_affine(geom, rule_t).vol.sum() - exact) <= 1e-12 * exact
    rule_p, table_p = reference_element(PRISM)
    for _ in range(200):  # slower generic path; planar-faced prisms
        geom = random_prism_geometry(rng, twist=0.0)
        v = geom.coords
        linear = np.column_stack([v[1] - v[0], v[2] - v[0], (v[3] - v[0]) / 2.0])
        exact = abs(np.linalg.det(linear))
        vols = sum(
            jacobian_at_point(geom, q, rule_p, table_p).vol
            for q in range(rule_p.n_points)
        )
        assert abs(vols - exact) <= 1e-12 * exact
    _passed("structural invariants (nullity, symmetry, scaling, unity, volume)")


def test_traffic_counts_exact():
    expected = {CASES[0]: 36, CASES[1]: 66, CASES[2]: 52, CASES[3]: 80}
    rng = np.random.default_rng(SEED + 3)
    layouts = (
        BatchLayout(LayoutKind.ELEMENT_MAJOR),
        BatchLayout(LayoutKind.LANE_INTERLEAVED, 8),
        BatchLayout(LayoutKind.LANE_INTERLEAVED, 32),
    )
    n = 11  # not a lane-width multiple: exercises padded tails
    for (element, problem), accesses in expected.items():
        elements = [
            (random_geometry(element, rng), random_coefficients(problem, element, rng))
            for _ in range(n)
        ]
        for layout in layouts:
            batch = build_batch(elements, layout)
            for desc in case_descriptors(element, problem):
                res = integrate_batch(desc, batch)
                assert res.traffic.per_element(n) == accesses, (desc, layout)
                assert np.isfinite(res.stiffness).all()  # padding never leaks
    _passed("traffic counters match 36/66/52/80 for every variant and layout")


OP_TABLE = {
    Variant.QSS: (290, 2700, 986, 4806),
    Variant.SQS: (290, 10416, 986, 12492),
    Variant.SSQ: (290, 54876, 1623, 65232),
}
INTENSITY_TABLE = {
    Variant.QSS: (8, 41, 19, 60),
    Variant.SQS: (8, 158, 19, 156),
    Variant.SSQ: (8, 831, 31, 815),
}


def test_op_counts_and_intensities():
    for variant, row in OP_TABLE.items():
        for case, ops in zip(CASES, row):
            desc = KernelDescriptor(variant, natural_path(case[0]), case[1], case[0])
            assert phase_op_counts(desc).total == ops
            assert kernel_cost(desc).op_count == ops
    for variant, row in INTENSITY_TABLE.items():
        for case, intensity in zip(CASES, row):
            desc = KernelDescriptor(variant, natural_path(case[0]), case[1], case[0])
            assert kernel_cost(desc).arithmetic_intensity == intensity
    _passed("op counts (290..65232) and intensities (8..831)")


# per-profile bounds in ns for rows (tet/P, prism/P, tet/CD, prism/CD);
# every cell is max(accesses*8/bench_bw, ops/bench_flops) for the
# profile's benchmark figures
BOUND_TABLE = {
    "k20m": {
        Variant.QSS: (2.00, 3.67, 2.89, 4.44),
        Variant.SQS: (2.00, 9.47, 2.89, 11.36),
        Variant.SSQ: (2.00, 49.89, 2.89, 59.30),
    },
    "xeon-phi": {
        Variant.QSS: (1.68, 3.21, 2.43, 5.72),
        Variant.SQS: (1.68, 12.40, 2.43, 14.87),
        Variant.SSQ: (1.68, 65.33, 2.43, 77.66),
    },
    "xeon-e5": {
        Variant.QSS: (4.30, 15.00, 6.21, 26.70),
        Variant.SQS: (4.30, 57.87, 6.21, 69.40),
        Variant.SSQ: (4.30, 304.87, 9.02, 362.40),
    },
}


def test_model_regeneration():
    intensities = {
        "k20m": (45, 61),
        "xeon-phi": (25, 39),
        "xeon-e5": (18, 21),
    }
    for key, (peak, bench) in intensities.items():
        profile = BUILTIN_PROFILES[key]
        assert limiting_intensity(profile) == peak
        assert limiting_intensity(profile, use_benchmark=True) == bench
    for key, per_variant in BOUND_TABLE.items():
        profile = BUILTIN_PROFILES[key]
        for variant, row in per_variant.items():
            for case, expected in zip(CASES, row):
                desc = KernelDescriptor(variant, natural_path(case[0]), case[1], case[0])
                got = time_bound(desc, profile)
                assert abs(got - expected) <= 0.01, (key, variant, case, got)
    _passed("model regeneration (6 limiting intensities, 36 time bounds)")


# measured per-element times in ns with the reported percent-of-bound,
# grouped like BOUND_TABLE
MEASURED_TABLE = {
    "k20m": {
        Variant.QSS: ((2.02, 99), (12.80, 29), (4.46, 65), (15.58, 29)),
        Variant.SQS: ((2.02, 99), (38.39, 25), (6.05, 48), (64.81, 18)),
        Variant.SSQ: ((2.02, 99), (94.99, 53), (6.13, 47), (194.93, 30)),
    },
    "xeon-phi": {
        Variant.QSS: ((8.77, 19), (25.09, 13), (17.11, 14), (33.29, 17)),
        Variant.SQS: ((11.35, 15), (41.20, 30), (15.97, 15), (60.18, 25)),
        Variant.SSQ: ((11.43, 15), (101.20, 65), (16.53, 15), (132.46, 59)),
    },
    "xeon-e5": {
        Variant.QSS: ((19.31, 22), (49.74, 30), (26.74, 23), (64.27, 42)),
        Variant.SQS: ((18.77, 23), (128.07, 45), (24.86, 25), (133.14, 52)),
        Variant.SSQ: ((17.76, 24), (385.33, 79), (26.11, 35), (475.41, 76)),
    },
}


def test_efficiency_arithmetic():
    for key, per_variant in MEASURED_TABLE.items():
        profile = BUILTIN_PROFILES[key]
        for variant, row in per_variant.items():
            for case, (measured, pct) in zip(CASES, row):
                desc = KernelDescriptor(variant, natural_path(case[0]), case[1], case[0])
                got = efficiency(measured, time_bound(desc, profile))
                assert abs(got - pct) <= 1, (key, variant, case, got, pct)
    _passed("efficiency arithmetic reproduces reported percentages (+-1)")


def test_bench_smoke_100k(tmp_path):
    out = tmp_path / "smoke.csv"
    code = main(
        [
            "bench",
            "--elements",
            "100000",
            "--repeats",
            "3",
            "--processor",
            "xeon-e5",
            "--format",
            "csv",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    header, row = out.read_text().strip().split("\n")
    assert header == ",".join(CSV_COLUMNS)
    fields = dict(zip(CSV_COLUMNS, row.split(",")))
    assert int(fields["n_elements"]) >= 100_000
    assert float(fields["ns_per_element"]) > 0
    pct = int(fields["efficiency_pct"])
    assert 0 < pct <= 100
    _passed(f"bench smoke on 100k elements (efficiency {pct}%)")
