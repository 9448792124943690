import numpy as np
import pytest
from hypothesis import settings

from pifo_bench.zoo import small_zoo

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def zoo():
    return small_zoo()


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion; returns the verdict."""
    def record(num, title, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] {num:>2}. {title}: {detail}"
        _ACCEPTANCE.append((num, line))
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
