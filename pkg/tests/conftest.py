import numpy as np
import pytest

from ctqrw.models import Depolarizing, qubit_kraus
from ctqrw.quantum import lindblad_from_kraus, make_density


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def plus_x_state():
    return make_density(0.5 * np.array([[1.0, 1.0], [1.0, 1.0]], dtype=complex))


@pytest.fixture
def depolarizing_generator():
    return lindblad_from_kraus(qubit_kraus(Depolarizing()))
