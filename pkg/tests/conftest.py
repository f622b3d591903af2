import numpy as np
import pytest

from pluriperiod.core.config import settings
from pluriperiod.numerics.forms import poincare_form
from pluriperiod.numerics.fuchsian import cyclic_group, surface_group


@pytest.fixture(scope="session")
def octagon():
    """The genus-2 group and its fundamental octagon."""
    return surface_group(2)


@pytest.fixture(scope="session")
def cyclic():
    return cyclic_group(2.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture(scope="session")
def series_forms(octagon):
    """Truncated Poincare series at the default radius, keyed by (m, nu)."""
    G, _ = octagon
    cache = {}

    def get(m: int, nu: int):
        if (m, nu) not in cache:
            cache[(m, nu)] = poincare_form(G, m, nu, settings.DEFAULT_RADIUS)
        return cache[(m, nu)]

    return get
