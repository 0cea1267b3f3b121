import os
import sys

import pytest

from crflat import jet

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture(params=jet.available_backends())
def backend(request):
    """Run a test once per jet kernel backend."""
    previous = jet.get_backend()
    jet.set_backend(request.param)
    yield request.param
    jet.set_backend(previous)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
