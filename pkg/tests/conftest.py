import numpy as np
import pytest

from qconformal import harness
from qconformal.potential import potential_from_density
from qconformal.profiles import bump_density


@pytest.fixture(scope="session")
def bump_half():
    """Potential-generated profile with normalized total curvature 0.5."""
    density = bump_density(4, 0.5)
    return density, potential_from_density(density)


@pytest.fixture(scope="session")
def suite_reports():
    """One full verification-suite run shared by the acceptance tests."""
    return harness.run_suite(harness.SuiteConfig())


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
