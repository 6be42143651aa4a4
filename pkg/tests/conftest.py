import pytest

_ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


class _Criterion:
    def __init__(self, number: int, title: str):
        self.number, self.title, self.detail = number, title, ""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        ok = exc_type is None
        detail = self.detail if ok else f"{self.detail} {exc}".strip()
        _ACCEPTANCE[self.number] = (self.title, ok, detail.splitlines()[0] if detail else "")
        print(f"criterion {self.number:2d} {'PASS' if ok else 'FAIL'}: {self.title}")
        return False


@pytest.fixture
def criterion():
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, ok, detail = _ACCEPTANCE[n]
        line = f"criterion {n:2d} {'PASS' if ok else 'FAIL'}: {title}"
        if detail:
            line += f"  [{detail[:160]}]"
        terminalreporter.write_line(line)
