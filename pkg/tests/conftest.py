import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from toa import GaussianSpec, PhysicalConstants, gaussian, make_grid  # noqa: E402


@pytest.fixture(scope="session")
def free_grid():
    return make_grid(-40, 40, 4096)


@pytest.fixture(scope="session")
def fast_packet(free_grid):
    """Gaussian(0, 10, 1) with m = hbar = 1."""
    return gaussian(GaussianSpec(0.0, 10.0, 1.0), free_grid, PhysicalConstants())


@pytest.fixture(scope="session")
def figure2_8():
    from toa import figure2_run

    return figure2_run(8.0)


@pytest.fixture(scope="session")
def figure2_1225():
    from toa import figure2_run

    return figure2_run(12.25)


@pytest.fixture(scope="session")
def figure2_15():
    from toa import figure2_run

    return figure2_run(15.0)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
