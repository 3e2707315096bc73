import re
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixture_text():
    def load(name: str) -> str:
        return (FIXTURES / name).read_text()

    return load


@pytest.fixture
def fixture_path():
    def path(name: str) -> Path:
        return FIXTURES / name

    return path


# One visible pass/fail line per acceptance criterion, printed from the
# reporting hook so it survives output capturing.

CRITERIA = {
    1: "travel example merge query scores 1.0 locally and 0.81 mapped-only",
    2: "non-crossing delivery invariant over 1e5 orders per regime",
    3: "independent-lead loss fraction matches the Erlang-B recursion",
    4: "gamma and exponential sampler moments",
    5: "delivery adjustment branch examples and random-triple properties",
    6: "deadline proposition state machine",
    7: "monitor determinism and closure freshness over 50 ticks",
    8: "fragment fixture suite yields exactly the expected errors",
    9: "exogenous vs endogenous fill-rate trend",
    10: "serializer/parser round-trip on 1000 random knowledge bases",
}

_NODE = re.compile(r"test_acceptance\.py::test_c(\d+)")
_seen: set[int] = set()


def pytest_runtest_logreport(report):
    m = _NODE.search(report.nodeid)
    if not m:
        return
    number = int(m.group(1))
    if report.when == "call" or (report.when == "setup" and report.failed):
        if number in _seen:
            return
        _seen.add(number)
        status = "PASS" if report.passed else "FAIL"
        print(f"\n[{status}] criterion {number}: {CRITERIA[number]}")
