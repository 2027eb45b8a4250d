"""Shared fixtures. PDE ladders and calibrations are expensive, so each runs once per session."""

from __future__ import annotations

import functools
import time

import pytest

from hestonvvix.calibration import CalibrationSpec, VvixMode, calibrate, synthetic_quotes
from hestonvvix.model import PRESETS, VIX_TENOR, MarketConvention
from hestonvvix.pde import TABLE2_LADDER, pde_vvix
from hestonvvix.replication import default_vix_option_grid
from hestonvvix.vix import vvix_simple

T = VIX_TENOR

# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


@functools.lru_cache(maxsize=None)
def pde_ladder_timed(set_name: str, k1: float) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """PDE VVIX and wall time for every (N, M, L) row of the convergence ladder."""
    grid = default_vix_option_grid(k1)
    values, seconds = [], []
    for n, m, l_ in TABLE2_LADDER:
        start = time.perf_counter()
        values.append(pde_vvix(PRESETS[set_name], MarketConvention(), 100.0, M=m, L=l_, N=n, vix_grid=grid).points)
        seconds.append(time.perf_counter() - start)
    return tuple(values), tuple(seconds)


def pde_ladder(set_name: str, k1: float) -> tuple[float, ...]:
    return pde_ladder_timed(set_name, k1)[0]


@functools.lru_cache(maxsize=None)
def round_trip(kind: str):
    """(truth, result) of the synthetic-quote calibrations shared by several suites."""
    if kind == "plain":
        truth = PRESETS["set4"]
        spec = CalibrationSpec(synthetic_quotes(truth))
    elif kind == "fixed-kappa":
        truth = PRESETS["set2"]
        spec = CalibrationSpec(synthetic_quotes(truth), fixed={"kappa": 0.75})
    elif kind == "solve":
        truth = PRESETS["set4"]
        spec = CalibrationSpec(synthetic_quotes(truth), vvix_mode=VvixMode.solve(vvix_simple(truth, T).points))
    else:
        raise ValueError(kind)
    return truth, calibrate(spec)


@pytest.fixture(scope="session")
def ladder():
    return pde_ladder


@pytest.fixture(scope="session")
def ladder_timed():
    return pde_ladder_timed


@pytest.fixture(scope="session")
def record_criterion():
    """Store the summary line of one acceptance criterion and echo it."""
    def record(number: int, title: str, passed: bool, detail: str) -> None:
        line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)

    return record


@pytest.fixture(scope="session")
def calibrations():
    return round_trip


@pytest.fixture
def conv():
    return MarketConvention()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
