import pytest

# filled by the acceptance module: criterion number -> "PASS ..." / "FAIL ..."
CRITERIA = {}


@pytest.fixture
def record():
    def _record(number, ok, detail):
        CRITERIA[number] = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[number])
