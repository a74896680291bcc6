import json
from pathlib import Path

import pytest

from qcpm import checks
from qcpm.lo_core import embed

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def frozen():
    data = json.loads((FIXTURES / "oracle_values.json").read_text())
    return {k: v["value"] for k, v in data.items()}


@pytest.fixture(scope="session")
def emb1():
    return embed(checks.fixture("1x1"))


@pytest.fixture(scope="session")
def emb2():
    return embed(checks.fixture("2x2"))


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
