from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from lpterm.parser import parse_file

ROOT = Path(__file__).resolve().parent.parent
PROGRAMS = ROOT / "programs"

settings.register_profile(
    "repo",
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("repo")


def load(name: str):
    return parse_file(PROGRAMS / f"{name}.pl")


@pytest.fixture
def fg():
    return load("fg")


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
