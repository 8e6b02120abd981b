import numpy as np
import pytest

from blockenc.algebraic import build_constituents
from blockenc.f1 import default_bundle


@pytest.fixture(scope="session")
def bundle():
    return default_bundle()


@pytest.fixture(scope="session")
def constituents(bundle):
    return build_constituents(bundle)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE: list[tuple[int, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(n, ok, detail)``; returns ``ok``."""
    def record(n: int, ok: bool, detail: str) -> bool:
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        _ACCEPTANCE.append((n, ok, line))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)
