import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hypernoise import matcore as mc  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def bell():
    return mc.bell_triplet()


@pytest.fixture(scope="session")
def he():
    return mc.make_state("hyperentangled")


@pytest.fixture(scope="session")
def ent():
    return mc.make_state("entangled")


P_GRID = np.linspace(0.0, 1.0, 101)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
