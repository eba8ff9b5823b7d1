import pytest

from fuzzywash import build_washing_controller

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def washing_spec():
    return build_washing_controller()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
