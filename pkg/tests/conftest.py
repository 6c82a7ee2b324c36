import numpy as np
import pytest

from fpclab.field import MERSENNE61, field_new


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def f7():
    return field_new(7)


@pytest.fixture(scope="session")
def f61():
    return field_new(MERSENNE61)


@pytest.fixture(scope="session")
def f_fast():
    return field_new(40961)
