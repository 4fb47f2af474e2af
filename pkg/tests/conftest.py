import pytest

from sievekit.arithmetic import arithmetic_tables, from_offsets
from sievekit.delay_ode import solve_j


@pytest.fixture(scope="session")
def tables_10k():
    return arithmetic_tables(10_000)


@pytest.fixture(scope="session")
def tuple_n():
    return from_offsets([0])


@pytest.fixture(scope="session")
def twin():
    return from_offsets([0, 2])


@pytest.fixture(scope="session")
def jfun():
    """Session cache of solved delay ODEs keyed by (kappa, w_max)."""
    cache = {}

    def get(kappa, w_max=None):
        if w_max is None:
            w_max = max(kappa - 1.0 / 9.0, 1.0)
        key = (kappa, round(w_max, 9))
        if key not in cache:
            cache[key] = solve_j(kappa, w_max)
        return cache[key]

    return get
