import math

import pytest

from rectdim.cantor import CantorAxisSpec

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def shrink_instance():
    """Two-axis shrinking-target instance: base 2 full digits, base 3 digits {0, 2}."""
    return [CantorAxisSpec.full(2), CantorAxisSpec(3, (0, 2))], [math.log(2), 0.0]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
