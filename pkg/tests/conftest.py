import hypothesis
import numpy as np
import pytest

from qvisolve import FlowConfig, integrate, make_halfline_vi, make_l2_example
from qvisolve.problems import default_problem_suite

hypothesis.settings.register_profile(
    "suite", deadline=None, max_examples=100, derandomize=True)
hypothesis.settings.load_profile("suite")


@pytest.fixture(scope="session")
def l2_problem():
    return make_l2_example(50, 2.0)


@pytest.fixture(scope="session")
def halfline():
    return make_halfline_vi()


@pytest.fixture(scope="session")
def problem_suite():
    return default_problem_suite()


@pytest.fixture(scope="session")
def geometric_x0():
    # the Figure-style start 1/2, 1/6, 1/18, ... truncated to 50 coordinates
    return 0.5 / 3.0 ** np.arange(50)


@pytest.fixture(scope="session")
def halfline_reference_endpoint(halfline):
    """Endpoint of the h=1e-5 RK4 reference run on the half-line VI
    (lambda=0.1, x0=2, t_end=5); shared by the order-of-convergence checks."""
    trace = integrate(halfline, [2.0],
                      FlowConfig(lam=0.1, h=1e-5, t_end=5.0, scheme="rk4"))
    assert trace.status == "completed"
    return float(trace.x[-1][0])
