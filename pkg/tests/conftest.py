import pytest

_RESULTS = []


class _Recorder:
    def __call__(self, criterion, passed, detail=""):
        _RESULTS.append((criterion, bool(passed), detail))
        return passed


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion check."""
    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in _RESULTS:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {criterion}  {detail}".rstrip())
