from pathlib import Path

import pytest

from _report import ACCEPTANCE_LINES
from bsm import data

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fig1():
    return data.figure1_instance()


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
