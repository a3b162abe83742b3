import functools

import pytest

from algthermo.enumeration import dovetail_enumerate

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


@functools.lru_cache(maxsize=None)
def corpus(L, Tmax=2**20):
    """Enumerations are pure functions of (L, Tmax); share them across the session."""
    return dovetail_enumerate(L, Tmax)


@pytest.fixture(scope="session")
def c6():
    return corpus(6, 10)


@pytest.fixture(scope="session")
def c14():
    return corpus(14)


@pytest.fixture
def report():
    def add(name, ok, detail=""):
        ACCEPTANCE_RESULTS.append((name, bool(ok), detail))
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return add


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
