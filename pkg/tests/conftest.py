import pytest

_VERDICTS = {}


@pytest.fixture
def verdict(request):
    """Record ``(criterion, passed, detail)`` for the end-of-run summary."""

    def record(number, passed, detail=""):
        _VERDICTS[number] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_VERDICTS):
        ok, detail = _VERDICTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
