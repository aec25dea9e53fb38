import pytest

_LINES_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_LINES_KEY] = {}


@pytest.fixture
def acceptance(request):
    """Record ``(criterion, passed, detail)``; summarized once per session."""
    lines = request.config.stash[_LINES_KEY]

    def record(criterion: str, passed: bool, detail: str) -> bool:
        print(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
        prev = lines.get(criterion)
        # the summary line fails if any part of the criterion failed
        if prev is not None:
            lines[criterion] = (prev[0] and passed, f"{prev[1]}; {detail}")
        else:
            lines[criterion] = (passed, detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash[_LINES_KEY]
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(lines, key=lambda c: int(c.split()[1])):
        passed, detail = lines[criterion]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {criterion}: {detail}")
