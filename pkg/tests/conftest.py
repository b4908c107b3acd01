import numpy as np
import pytest

from hardy_dirichlet import DirichletPolynomial, build_factor_table


@pytest.fixture(scope="session")
def small_table():
    return build_factor_table(10**4)


@pytest.fixture(scope="session")
def big_table():
    return build_factor_table(10**6)


def random_poly(rng: np.random.Generator, N: int, density: float = 0.5, integer: bool = False):
    """Random polynomial with support drawn from 1..N (always includes N)."""
    ns = np.arange(1, N + 1)
    keep = rng.random(N) < density
    keep[-1] = True
    ns = ns[keep]
    if integer:
        c = rng.integers(-5, 6, size=ns.size)
        c[c == 0] = 1
        return DirichletPolynomial.from_terms(dict(zip(ns.tolist(), c.tolist())))
    c = rng.normal(size=ns.size) + 1j * rng.normal(size=ns.size)
    return DirichletPolynomial.from_terms(dict(zip(ns.tolist(), c.tolist())))
