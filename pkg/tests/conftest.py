import pytest

_ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


class AcceptanceLog:
    """Collects one verdict per numbered acceptance criterion."""

    def record(self, number: int, title: str, passed: bool, detail: str = "") -> None:
        _ACCEPTANCE[number] = (title, passed, detail)


@pytest.fixture(scope="session")
def acceptance_log():
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed, detail = _ACCEPTANCE[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict}  {title}  ({detail})")
