from __future__ import annotations

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def naive_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Integer matrix product reduced mod 2; the reference for packed arithmetic."""
    return (a.astype(np.int64) @ b.astype(np.int64)) % 2


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
