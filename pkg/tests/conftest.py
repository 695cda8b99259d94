import contextlib
import time

import pytest

_RESULTS = []


class _Criterion:
    def __init__(self):
        self.detail = ""

    def note(self, text):
        self.detail = text


@pytest.fixture
def criterion():
    """Context manager that records one acceptance line: number, name, PASS/FAIL,
    elapsed time and a short detail string."""

    @contextlib.contextmanager
    def _run(number, name, budget_s):
        c = _Criterion()
        t0 = time.perf_counter()
        status = "FAIL"
        try:
            yield c
            elapsed = time.perf_counter() - t0
            assert elapsed < budget_s, f"took {elapsed:.1f}s, budget {budget_s}s"
            status = "PASS"
        except pytest.skip.Exception:
            status = "SKIP"
            raise
        finally:
            elapsed = time.perf_counter() - t0
            _RESULTS.append(f"[{status}] {number:>2}. {name} ({elapsed:.2f}s) {c.detail}".rstrip())

    return _run


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in _RESULTS:
        terminalreporter.write_line(line)
