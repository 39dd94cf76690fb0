import numpy as np
import pytest

from coulscat import PhaseShiftModel, build_scenario_from_eta, build_table

EPS = 1e-3


def _exact_table(eta, eps=EPS):
    scenario = build_scenario_from_eta(eta, eps)
    return build_table(scenario, PhaseShiftModel.coulomb_exact())


@pytest.fixture(scope="session")
def table_eta10():
    return _exact_table(10.0)


@pytest.fixture(scope="session")
def table_eta_m10():
    return _exact_table(-10.0)


@pytest.fixture(scope="session")
def table_eta800():
    return _exact_table(800.0)


@pytest.fixture(scope="session")
def table_free():
    return _exact_table(0.0)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)
