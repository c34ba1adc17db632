import functools

import numpy as np
import pytest

from agler.fixtures import INNER
from agler.hilbert import canonical_kernels
from agler.inner import validate


@functools.lru_cache(maxsize=None)
def inner(name, exact=False):
    Q, p = INNER[name]()
    if not exact:
        Q, p = Q.as_float(), p.as_float()
    return validate(Q, p)


@functools.lru_cache(maxsize=None)
def kernels(name):
    return canonical_kernels(inner(name))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def torus_points(m, seed=0):
    r = np.random.default_rng(seed)
    return np.exp(2j * np.pi * r.random((m, 2)))


def disk_points(m, seed=0, radius=0.95):
    r = np.random.default_rng(seed)
    return radius * np.sqrt(r.random((m, 2))) * np.exp(2j * np.pi * r.random((m, 2)))


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
