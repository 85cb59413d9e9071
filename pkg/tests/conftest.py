import pytest

from thrustgov.aero import parametric_surface
from thrustgov.turbine import TurbineParams


@pytest.fixture(scope="session")
def surface():
    return parametric_surface()


@pytest.fixture(scope="session")
def params():
    return TurbineParams()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
