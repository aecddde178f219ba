import pytest

_CRITERIA: dict[int, list[tuple[str, bool, str]]] = {}


@pytest.fixture
def criterion():
    """Record named checks for an acceptance criterion, then assert them all."""

    def record(number: int, name: str, ok: bool, detail: str = "") -> bool:
        _CRITERIA.setdefault(number, []).append((name, bool(ok), detail))
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        checks = _CRITERIA[number]
        status = "PASS" if all(ok for _, ok, _ in checks) else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}")
        for name, ok, detail in checks:
            mark = "ok  " if ok else "FAIL"
            terminalreporter.write_line(f"    [{mark}] {name} {detail}".rstrip())
