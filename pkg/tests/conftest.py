import numpy as np
import pytest

from ltlab.grid import SpaceGrid, TimeGrid, covering_space_grid, path_range
from ltlab.simulate import ProcessSpec, SeedPolicy, deterministic_path, simulate

SEED = 20240601


@pytest.fixture
def zigzag():
    """{0, 1, 0, 1, 0} on [0, 1] with realized qv increments {1, 1, 1, 1}."""
    return deterministic_path("zigzag", TimeGrid(1.0, 4))


@pytest.fixture
def unit_bins():
    """Five unit bins [-1, 0), [0, 1), ..., [3, 4)."""
    return SpaceGrid(-1.0, 4.0, 5)


@pytest.fixture(scope="session")
def bm_path():
    return simulate(ProcessSpec("brownian"), TimeGrid(1.0, 2**14), SeedPolicy(SEED, 7))


@pytest.fixture(scope="session")
def bm_space(bm_path):
    lo, hi = path_range(bm_path)
    return covering_space_grid(lo, hi, 2.0**-8, margin_bins=8)


def brownian_paths(n_paths, n_steps=2**12, seed=SEED):
    grid = TimeGrid(1.0, n_steps)
    return [simulate(ProcessSpec("brownian"), grid, SeedPolicy(seed, i)) for i in range(n_paths)]


def rng(seed=SEED):
    return np.random.default_rng(seed)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one 'criterion N: PASS|FAIL detail' line; also printed in the terminal summary."""

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
