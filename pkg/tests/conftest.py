import numpy as np
import pytest

from pend3d.dynamics import BodyParams


@pytest.fixture
def body():
    """Unsorted body with the mass centre on the third axis."""
    return BodyParams(J=[0.13, 0.28, 0.17], m=1.0, g=9.81, rho=[0.0, 0.0, 0.3])


@pytest.fixture
def elliptic():
    return BodyParams(J=[0.4486, 0.3943, 0.0772], m=1.0, g=9.81,
                      rho=[-0.0140, 0.1044, 0.4989])


@pytest.fixture
def axisym():
    return BodyParams(J=[0.2, 0.2, 0.05], m=1.0, g=9.81, rho=[0.0, 0.0, 0.3])


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_unit(rng):
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def random_tangent(rng, G, scale=1.0):
    v = scale * rng.standard_normal(3)
    return v - (v @ G) * G


# one PASS/FAIL line per acceptance criterion, echoed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
