import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from acceptance_log import LOG  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if not LOG:
        return
    terminalreporter.section("acceptance criteria")
    for line in LOG.lines():
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def rng():
    import numpy as np

    return np.random.default_rng(20240611)
