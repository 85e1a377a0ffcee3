import numpy as np
import pytest

import ptosc

REFERENCE_Z = 0.3 + 0.2j


@pytest.fixture(scope="session")
def params():
    return ptosc.ModelParams(z_star=REFERENCE_Z, cutoff=64, margin=8)


@pytest.fixture(scope="session")
def ops(params):
    return ptosc.build_operators(params)


@pytest.fixture(scope="session")
def system(params, ops):
    return ptosc.build_system(params, ops)


@pytest.fixture(scope="session")
def bundle(params, ops, system):
    return ptosc.build_metric(params, ops, system)


@pytest.fixture(scope="session")
def suite(params, system, bundle):
    return ptosc.build_suite(params, system, bundle)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


def random_state(rng, dim, support):
    psi = np.zeros(dim, dtype=complex)
    psi[:support] = rng.normal(size=support) + 1j * rng.normal(size=support)
    return psi / np.linalg.norm(psi)
