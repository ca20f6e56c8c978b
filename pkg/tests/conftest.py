import pytest

_ACCEPTANCE = []


@pytest.fixture(scope="session")
def report():
    """``report(criterion, passed, detail)`` adds one line to the acceptance summary."""
    def add(criterion, passed, detail):
        _ACCEPTANCE.append((criterion, "PASS" if passed else "FAIL", detail))
        return passed
    return add


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, verdict, detail in sorted(_ACCEPTANCE, key=lambda r: (int(r[0].rstrip("abcd")), r[0])):
        terminalreporter.write_line(f"criterion {criterion:>3}: {verdict}  {detail}")
