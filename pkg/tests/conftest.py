import numpy as np
import pytest

from bec_thermo.jc import SystemParams
from bec_thermo.units import NANOKELVIN


@pytest.fixture
def ref_params():
    """Mode 2pi x 10 Hz, coupling 2pi x 0.2 Hz, detuning 2pi x 2 Hz."""
    return SystemParams.from_hz(10.0, 0.2, delta_hz=2.0)


@pytest.fixture
def t_grid():
    return np.linspace(0.1, 2.0, 20) * NANOKELVIN


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
