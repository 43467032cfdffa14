import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from nisqsearch.search import SearchProblem
from nisqsearch.transpiler import CouplingGraph

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def problem():
    return SearchProblem.default()


@pytest.fixture(scope="session")
def full6():
    return CouplingGraph.full(6)


@pytest.fixture(scope="session")
def lagos():
    return CouplingGraph.lagos_t()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[k])
