import numpy as np
import pytest

from podles.hilbert import HilbertSpec
from podles.qcore import HalfInt
from podles.spectral import build_spectral_data


@pytest.fixture(scope="session")
def data_21():
    return build_spectral_data(HilbertSpec(HalfInt(21)), 0.5)


@pytest.fixture(scope="session")
def data_7():
    return build_spectral_data(HilbertSpec(HalfInt(7)), 0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
