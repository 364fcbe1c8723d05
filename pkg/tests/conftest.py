import numpy as np
import pytest


@pytest.fixture
def rng():
    # test-data generator only; the package itself never uses numpy's default_rng
    return np.random.default_rng(12345)


def orthonormal_columns(rng, m, n):
    q, _ = np.linalg.qr(rng.standard_normal((m, m)))
    return np.asfortranarray(q[:, :n])


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
