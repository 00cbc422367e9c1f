import numpy as np
import pytest

from feklab.geometry import ElementGeometry
from feklab.refelem import ElementType


@pytest.fixture
def unit_tet() -> ElementGeometry:
    return ElementGeometry(
        ElementType.TETRAHEDRON, ElementType.TETRAHEDRON.reference_vertices
    )


@pytest.fixture
def unit_prism() -> ElementGeometry:
    return ElementGeometry(ElementType.PRISM, ElementType.PRISM.reference_vertices)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
