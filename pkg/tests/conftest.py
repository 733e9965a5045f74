import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from treefca.datasets import load_tennis, tennis_tree  # noqa: E402


@pytest.fixture(scope="session")
def tennis():
    return load_tennis()


@pytest.fixture(scope="session")
def fixture_tree():
    return tennis_tree()


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
