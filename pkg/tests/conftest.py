import sys

import numpy as np
import pytest

from qoptsim.kernels import available_backends


def random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_pd(rng, n, cond_floor=1e-2):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    s = a @ a.conj().T + cond_floor * n * np.eye(n)
    d = np.sqrt(np.diag(s).real)
    return s / np.outer(d, d)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=sorted(available_backends()))
def backend(request):
    return available_backends()[request.param]


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
