import numpy as np
import pytest

from ernstrh import boundary_data_of, build_contour_system


@pytest.fixture(scope="session")
def contours128():
    return build_contour_system(0.2, 128)


@pytest.fixture(scope="session")
def contours64():
    return build_contour_system(0.2, 64)


@pytest.fixture(scope="session")
def kp_data():
    return boundary_data_of("khan-penrose")


@pytest.fixture(scope="session")
def nh_data():
    return boundary_data_of("nutku-halil")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
