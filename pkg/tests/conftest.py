import math
import sys

import pytest
from hypothesis import HealthCheck, settings

from bmcarpet.carpet import TwoRowMeasure
from bmcarpet.spectra import exceptional_q0

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SIGMA_23 = math.log(2) / math.log(3)


@pytest.fixture
def exceptional():
    """(m, n, n0, n1) = (2, 3, 2, 1) at the q0 making the ratio A equal to -1."""
    return TwoRowMeasure(2, 3, 2, 1, exceptional_q0(2, 1, SIGMA_23))


@pytest.fixture
def half():
    return TwoRowMeasure(2, 3, 2, 1, 0.5)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(mod.REPORT):
        for line in mod.REPORT[criterion]:
            terminalreporter.write_line(line)
