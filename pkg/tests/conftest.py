import functools
import time

import numpy as np
import pytest

from ccpb import BoundaryData, IonSystem, make_graded, make_uniform, solve
from ccpb.solver import SolverConfig

MAIN = IonSystem([(1, 1.2)], [(1, 0.4), (2, 0.4)])
H_CELLS = 4096

# lines printed by the acceptance tests, echoed again in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def preset_bd(tag, eps):
    eta = 0.5 * eps ** 2 if tag == "I" else 0.5 * eps
    return BoundaryData(1.0, -1.0, eta)


@functools.lru_cache(maxsize=None)
def preset_solution(tag, k, model="ccpb", n_cells=H_CELLS):
    """Cached solve of Table 1 row ``tag`` at eps = 2^-k."""
    eps = 2.0 ** -k
    t0 = time.perf_counter()
    rep = solve(MAIN, preset_bd(tag, eps), eps, make_uniform(n_cells), SolverConfig(), model)
    rep.extra["seconds"] = time.perf_counter() - t0
    assert rep.converged, rep.message
    return rep


@functools.lru_cache(maxsize=None)
def nonneutral_solution(k, alpha=1.0, beta=2.0):
    eps = 2.0 ** -k
    grid = make_graded(0.05 * eps * eps, 1.15, 2.0 ** -9)
    rep = solve(IonSystem([(1, alpha)], [(1, beta)]), BoundaryData(0.0, 0.0, 0.0), eps, grid)
    assert rep.converged, rep.message
    return rep


@pytest.fixture
def main_sys():
    return MAIN


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
