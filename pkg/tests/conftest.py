import pytest

from klab.lab import Lab, LabConfig

SNAPSHOT_ROUNDS = (12, 14, 16, 18, 20)


@pytest.fixture(scope="session")
def lab():
    """The pinned lab: default config, stores built lazily to round 20."""
    return Lab(LabConfig())


@pytest.fixture(scope="session")
def lab_views():
    """Frozen lab views at rising rounds, last one equal to the pinned lab."""
    live = Lab(LabConfig(), target_round=SNAPSHOT_ROUNDS[0])
    views = []
    for r in SNAPSHOT_ROUNDS:
        live.advance_to(r)
        views.append(live.copy())
    return views


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict_line():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
