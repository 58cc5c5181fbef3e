import pytest

from jumphedge.market import derive_params

# (criterion, passed, detail) rows filled by the acceptance module
ACCEPTANCE_RESULTS: list[tuple[int, bool, str]] = []


@pytest.fixture
def params():
    # (s0, sigma, lambda, T) used throughout the examples
    return derive_params(100.0, 0.1, 1.0, 1.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
