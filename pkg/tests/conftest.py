import math

import pytest

from quanteq import CustomDensity, Exponential, Gaussian, SupportSpec, Uniform


@pytest.fixture(scope="session")
def expo():
    return Exponential(1.0)


@pytest.fixture(scope="session")
def gauss():
    return Gaussian(0.0, 1.0)


@pytest.fixture(scope="session")
def uni():
    return Uniform(0.0, 1.0)


@pytest.fixture(scope="session")
def logistic():
    # log-concave, two-sided unbounded; exercises the quadrature path
    def pdf(x):
        e = math.exp(-abs(x))
        return e / (1.0 + e) ** 2

    return CustomDensity(pdf, SupportSpec(-math.inf, math.inf),
                         name="logistic")
