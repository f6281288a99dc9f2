import numpy as np
import pytest

from nbein import builtin_family, solve_at

EX2_POINT = (1.0, 0.3, 1.0)


@pytest.fixture(scope="session")
def ex1():
    return builtin_family("example1")


@pytest.fixture(scope="session")
def ex2():
    return builtin_family("example2")


@pytest.fixture(scope="session")
def b1(ex1):
    return solve_at(ex1, (0.0, 1.0), levels=12)


@pytest.fixture(scope="session")
def b2(ex2):
    return solve_at(ex2, EX2_POINT, levels=12)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_hermitian(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2
