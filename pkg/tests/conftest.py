"""Shared scenes and cached Monte Carlo runs.

Several tests look at the same seeded range and WI sweeps, so the sweeps are
cached per process. The acceptance module records one line per criterion,
printed in the terminal summary.
"""

from __future__ import annotations

import functools

import numpy as np
import pytest

from wirange import SearchGrid, estimate_range, estimate_wi, partition_bands, synth_surface
from wirange.estimate import window_length_for
from wirange.simulate import REFERENCE_TONALS, reference_scene

R_TRUE = 22_700.0
RDOT = 10.2
BETA = 1.21
GUARD_HZ = 0.4
M_RANGE = 212
M_WI = 183
BETA_GRID = np.round(np.arange(0.50, 1.30 + 1e-9, 0.01), 2)

ACCEPTANCE_LINES: list[str] = []


def reference_band():
    return partition_bands(reference_scene().freqs, REFERENCE_TONALS, GUARD_HZ)


def range_grid():
    return SearchGrid.around(R_TRUE, 0.4, 10.0, RDOT, BETA)


@functools.lru_cache(maxsize=None)
def range_window() -> int:
    return window_length_for(M_RANGE, range_grid(), 2.5, reference_band(), 5000)


@functools.lru_cache(maxsize=None)
def wi_window() -> int:
    grid = SearchGrid([R_TRUE], RDOT, BETA_GRID)
    return window_length_for(M_WI, grid, 2.5, reference_band(), 5000)


def range_scene(seed: int, **overrides):
    return synth_surface(reference_scene(n_snapshots=range_window(), seed=seed, **overrides))


def wi_scene(seed: int, **overrides):
    return synth_surface(reference_scene(n_snapshots=wi_window(), seed=seed, **overrides))


@functools.lru_cache(maxsize=None)
def range_run(seed: int):
    surface, _ = range_scene(seed)
    return estimate_range(surface, RDOT, BETA, range_grid().r_grid, reference_band(), n_striations=M_RANGE)


@functools.lru_cache(maxsize=None)
def wi_run(seed: int):
    surface, _ = wi_scene(seed)
    return estimate_wi(surface, R_TRUE, RDOT, BETA_GRID, reference_band(), n_striations=M_WI)


@pytest.fixture
def report():
    def add(number: int, passed: bool, detail: str):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return add


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
