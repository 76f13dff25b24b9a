import zlib

import numpy as np
import pytest

from qubound.harness.rng import Stream


def random_matrix(rng: Stream, d: int) -> np.ndarray:
    return rng.complex_normal((d, d))


def random_hermitian(rng: Stream, d: int) -> np.ndarray:
    g = rng.complex_normal((d, d))
    return (g + g.conj().T) / 2


@pytest.fixture
def rng(request):
    # A fresh, test-specific stream so tests do not share random state.
    return Stream(7, zlib.crc32(request.node.name.encode()))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("]")[1].split(".")[0])):
            terminalreporter.write_line(line)
