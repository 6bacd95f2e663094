import numpy as np
import pytest

from faberlab.covering import ThreePointSet, build_covering
from faberlab.harness import SYMMETRIC
from faberlab.series import LaurentTail


@pytest.fixture(scope="session")
def cov_tripod():
    return build_covering(ThreePointSet.parse(SYMMETRIC))


@pytest.fixture(scope="session")
def cov_collinear():
    return build_covering(ThreePointSet.parse("-1, 0, 1"))


@pytest.fixture(scope="session")
def cov_skew():
    return build_covering(ThreePointSet.parse("0, 1, 1i"))


@pytest.fixture
def segment_tail():
    # w + 1/(4w) maps |w| > 1/2 onto the complement of [-1, 1]
    return LaurentTail([0, 0.25])


def random_tail(rng, order=12, decay=0.5, scale=0.3):
    k = np.arange(order + 1)
    return LaurentTail(scale * (rng.normal(size=order + 1) + 1j * rng.normal(size=order + 1)) * decay**k)


_CRITERIA = []


@pytest.fixture(scope="session")
def report():
    """``report(n, ok, detail)`` records one acceptance line, printed in the terminal summary."""
    def record(n, ok, detail):
        line = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _CRITERIA.append((n, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_CRITERIA):
            terminalreporter.write_line(line)
