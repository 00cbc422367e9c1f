import numpy as np
import pytest

from feklab.geometry import ElementGeometry
from feklab.oracle import (
    integrate_high_order,
    integrate_reference,
    simplex_exact,
)
from feklab.problems import CoefficientSet, ProblemClass
from feklab.refelem import ElementType
from feklab.verify import (
    random_coefficients,
    random_prism_geometry,
    random_tet_geometry,
    relative_difference,
)

TET = ElementType.TETRAHEDRON
PRISM = ElementType.PRISM


def test_simplex_exact_volume(unit_tet):
    assert abs(simplex_exact((0, 0, 0, 0), unit_tet) - 1.0 / 6.0) < 1e-18


def test_simplex_exact_mixed_power(unit_tet):
    assert abs(simplex_exact((1, 1, 0, 0), unit_tet) - 1.0 / 120.0) < 1e-18


def test_simplex_exact_square_power(unit_tet):
    assert abs(simplex_exact((2, 0, 0, 0), unit_tet) - 1.0 / 60.0) < 1e-18


def test_simplex_exact_scales_with_volume(rng):
    geom = random_tet_geometry(rng)
    vol = simplex_exact((0, 0, 0, 0), geom)
    doubled = ElementGeometry(TET, geom.coords * 2.0)
    assert abs(simplex_exact((0, 0, 0, 0), doubled) - 8.0 * vol) < 1e-12 * vol


def test_simplex_exact_validates_input(unit_tet, unit_prism):
    with pytest.raises(ValueError):
        simplex_exact((0, 0, 0, 0), unit_prism)
    with pytest.raises(ValueError):
        simplex_exact((1, -1, 0, 0), unit_tet)


def test_reference_unit_tet_poisson(unit_tet):
    em = integrate_reference(unit_tet, CoefficientSet.poisson(np.zeros(4)))
    gradients = np.array([[-1, -1, -1], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    assert np.abs(em.A - gradients @ gradients.T / 6.0).max() < 1e-14


def test_reference_zero_coefficients(unit_prism):
    em = integrate_reference(
        unit_prism, CoefficientSet.convdiff(np.zeros((4, 4)), np.zeros(4))
    )
    assert np.all(em.A == 0.0) and np.all(em.b == 0.0)


def test_reference_mass_matrix_random_tets(rng):
    c = np.zeros((4, 4))
    c[0, 0] = 1.0
    coeff = CoefficientSet.convdiff(c, np.zeros(4))
    for _ in range(20):
        geom = random_tet_geometry(rng)
        em = integrate_reference(geom, coeff)
        exact = np.empty((4, 4))
        for r in range(4):
            for s in range(4):
                powers = [0, 0, 0, 0]
                powers[r] += 1
                powers[s] += 1
                exact[r, s] = simplex_exact(tuple(powers), geom)
        assert relative_difference(em.A, exact) < 1e-12


def test_high_order_level_one_matches_reference_on_affine_tets(rng):
    for _ in range(10):
        geom = random_tet_geometry(rng)
        coeff = random_coefficients(ProblemClass.CONV_DIFF, TET, rng)
        ref = integrate_reference(geom, coeff)
        high = integrate_high_order(geom, coeff, level=1)
        assert relative_difference(high.A, ref.A) < 1e-13
        assert relative_difference(high.b, ref.b) < 1e-13


def test_high_order_plateau_on_affine_prisms(rng):
    for _ in range(5):
        geom = random_prism_geometry(rng, twist=0.0)
        coeff = random_coefficients(ProblemClass.CONV_DIFF, PRISM, rng)
        l3 = integrate_high_order(geom, coeff, level=3)
        l4 = integrate_high_order(geom, coeff, level=4)
        assert relative_difference(l3.A, l4.A) < 1e-12
        assert relative_difference(l3.b, l4.b) < 1e-12


def test_high_order_poisson_needs_constant_rhs(unit_tet):
    varying = CoefficientSet.poisson(np.array([1.0, 2.0, 3.0, 4.0]))
    with pytest.raises(ValueError):
        integrate_high_order(unit_tet, varying, level=2)
    constant = CoefficientSet.poisson(np.full(4, 2.5))
    em = integrate_high_order(unit_tet, constant, level=2)
    assert np.abs(em.b - 2.5 / 24.0).max() < 1e-14


def test_high_order_level_validated(unit_tet):
    with pytest.raises(ValueError):
        integrate_high_order(
            unit_tet, CoefficientSet.poisson(np.zeros(4)), level=0
        )
