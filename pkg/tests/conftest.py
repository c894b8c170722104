import math

import pytest

from calmin import constructions as cn


@pytest.fixture(scope="session")
def sigma3():
    return cn.build_sigma(3)


@pytest.fixture(scope="session")
def sigma_prime34():
    return cn.build_sigma_prime(3, 4)


@pytest.fixture(scope="session")
def intermediate34():
    return cn.build_sigma_intermediate(3, 4)


@pytest.fixture(scope="session")
def book120():
    return cn.build_book([math.radians(a) for a in (90, 210, 330)])


@pytest.fixture(scope="session")
def book_flat():
    return cn.build_book([0.0, math.pi])


@pytest.fixture(scope="session")
def book_unbalanced():
    return cn.build_book([math.radians(a) for a in (100, 230, 330)])


@pytest.fixture(scope="session")
def book_sectors_unbalanced():
    return cn.book_from_sectors([math.radians(a) for a in (100, 130, 130)])


@pytest.fixture(scope="session")
def prism3():
    return cn.build_prism_cone(3, 1.0, 1.0)
