import json
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

DATA = Path(__file__).parent / "data"

settings.register_profile("rnetkit", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("rnetkit")


@pytest.fixture(scope="session")
def frozen():
    """Reference values from scripts/freeze_oracle_values.py (independent brute force)."""
    return json.loads((DATA / "oracle_values.json").read_text())


_ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record the one-line verdict of an acceptance criterion; printed in the terminal summary."""
    def record(name, passed, detail):
        _ACCEPTANCE_LINES.append(f"{name} {'PASS' if passed else 'FAIL'}: {detail}")
        print(_ACCEPTANCE_LINES[-1])
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
