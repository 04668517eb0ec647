import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import fracorder as fr

settings.register_profile(
    "ci",
    deadline=None,
    max_examples=40,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


@pytest.fixture(scope="session")
def box129():
    return fr.FrequencyBox((-4.0,), (4.0,), (129,))


@pytest.fixture(scope="session")
def builtin_symbol(box129):
    return fr.MatrixSymbol.builtin_example(box=box129)


@pytest.fixture(scope="session")
def example_data(box129):
    # phi_hat(2) = (1, 2): distinct moduli, so K is invertible there
    return fr.BandLimitedData.raised_cosine(box129, [1.0, 2.0], [2.0], [1.5])


@pytest.fixture(scope="session")
def diag_at_2(builtin_symbol):
    return fr.diagonalize(builtin_symbol, [2.0])


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
