import math

import numpy as np
import pytest

from hestonvvix.errors import DomainError, NoBracket
from hestonvvix.mc import mc_vix_option
from hestonvvix.model import PRESETS, VIX_TENOR, MarketConvention, expected_variance, vix_squared_heston
from hestonvvix.vix import (
    IndexQuote,
    solve_sigma_for_vvix,
    terminal_law,
    vix_future,
    vix_option,
    vvix_log_contract,
    vvix_simple,
)

T = VIX_TENOR
SETS = list(PRESETS)


def test_index_quote_rejects_negative():
    with pytest.raises(DomainError):
        IndexQuote(-1.0, T)
    assert IndexQuote(20.0, T).vol == pytest.approx(0.2)


@pytest.mark.parametrize("name,expected", [("set1", 15.4), ("set4", 22.2)])
def test_vix_future_examples(name, expected):
    assert vix_future(PRESETS[name], T).points == pytest.approx(expected, abs=0.05)


@pytest.mark.parametrize("name", SETS)
def test_vix_future_jensen_bound(name):
    p = PRESETS[name]
    bound = 100 * math.sqrt(vix_squared_heston(expected_variance(p, p.v0, T), T, p))
    assert vix_future(p, T).points <= bound


def test_vix_future_deterministic_limit():
    p = PRESETS["set1"].replace(sigma=1e-6)
    expected = 100 * math.sqrt(vix_squared_heston(expected_variance(p, p.v0, T), T, p))
    assert vix_future(p, T).points == pytest.approx(expected, abs=1e-4)


def test_vix_future_requires_positive_maturity():
    with pytest.raises(DomainError):
        vix_future(PRESETS["set1"], 0.0)


def test_call_at_zero_strike_is_future():
    p = PRESETS["set2"]
    assert vix_option(p, 0.0, T) == pytest.approx(vix_future(p, T).points, rel=1e-12)
    assert vix_option(p, 0.0, T, eta=-1) == 0.0


@pytest.mark.parametrize("K", [10.0, 15.0, 20.0, 30.0])
def test_put_call_parity(K):
    p = PRESETS["set2"]
    f = vix_future(p, T).points
    assert vix_option(p, K, T, 1) - vix_option(p, K, T, -1) == pytest.approx(f - K, abs=1e-6)


def test_option_against_monte_carlo():
    p = PRESETS["set3"]
    mc = mc_vix_option(p, 20.0, T, 1, n_paths=1_000_000, seed=7)
    assert mc.within(vix_option(p, 20.0, T, 1), 3.0)


def test_option_domain_errors():
    p = PRESETS["set1"]
    with pytest.raises(DomainError):
        vix_option(p, -1.0, T)
    with pytest.raises(DomainError):
        vix_option(p, 10.0, T, eta=0)


@pytest.mark.parametrize("name", ["set1", "set3", "set6"])
def test_call_monotone_and_convex_in_strike(name):
    p = PRESETS[name]
    k = np.arange(5.0, 60.0, 0.5)
    c = np.array([vix_option(p, x, T) for x in k])
    assert np.all(np.diff(c) <= 1e-12)
    assert np.all(np.diff(c, 2) >= -1e-9)


@pytest.mark.parametrize("name,expected,tol", [("set1", 105.4, 0.3), ("set2", 218.5, 0.5), ("set6", 196.7, 0.5)])
def test_log_contract_examples(name, expected, tol):
    assert vvix_log_contract(PRESETS[name], T).points == pytest.approx(expected, abs=tol)


@pytest.mark.parametrize("name,expected,tol", [("set1", 98, 0.5), ("set3", 382, 2), ("set5", 171, 1)])
def test_simple_examples(name, expected, tol):
    assert vvix_simple(PRESETS[name], T).points == pytest.approx(expected, abs=tol)


def test_simple_deterministic_limit():
    assert vvix_simple(PRESETS["set1"].replace(sigma=1e-8), T).points == pytest.approx(0.0, abs=1e-4)


def test_outputs_invariant_under_rho_and_rates():
    p = PRESETS["set1"]
    q = p.replace(rho=0.5)
    conv2 = MarketConvention(r=0.05, q=0.02, r_c=0.04)
    for fn in (vix_future, vvix_log_contract, vvix_simple):
        base = fn(p, T).points
        assert fn(q, T).points == base
        assert fn(p, T, conv2).points == base
    assert vix_option(q, 14.0, T, 1, conv2) == vix_option(p, 14.0, T, 1)


@pytest.mark.parametrize("name", SETS)
def test_simple_strictly_increasing_in_sigma(name):
    p = PRESETS[name]
    sig = np.geomspace(1e-4, 20, 400)
    vals = np.array([vvix_simple(p.replace(sigma=s), T).points for s in sig])
    assert np.all(np.diff(vals) > 0)


def test_log_contract_nonnegative_and_continuous():
    p = PRESETS["set3"]
    sig = np.arange(0.05, 3.0001, 0.05)
    vals = np.array([vvix_log_contract(p.replace(sigma=s), T).points for s in sig])
    assert np.all(vals >= 0)
    jumps = np.abs(np.diff(vals))
    # each step must be in line with its neighbours' slopes
    local = np.maximum(np.r_[jumps[1:], jumps[-1]], np.r_[jumps[0], jumps[:-1]])
    assert np.all(jumps <= 2.0 * local + 1e-9)


def test_log_contract_tiny_vol_of_vol():
    assert vvix_log_contract(PRESETS["set1"].replace(sigma=1e-6), T).points == pytest.approx(0.0, abs=1e-3)


def test_solve_sigma_examples():
    s1 = solve_sigma_for_vvix(98.0, PRESETS["set1"], T)
    assert s1 == pytest.approx(0.3150, abs=0.002)
    s6 = solve_sigma_for_vvix(IndexQuote(376.0, T), PRESETS["set6"], T)
    assert s6 == pytest.approx(2.0640, abs=0.01)


def test_solve_sigma_round_trip():
    p = PRESETS["set5"].replace(sigma=0.75)
    target = vvix_simple(p, T)
    assert solve_sigma_for_vvix(target, p.replace(sigma=0.1), T) == pytest.approx(0.75, abs=1e-8)


def test_solve_sigma_no_bracket():
    p = PRESETS["set1"]
    with pytest.raises(NoBracket):
        solve_sigma_for_vvix(1e-6, p, T)
    with pytest.raises(NoBracket):
        solve_sigma_for_vvix(1e6, p, T)
    with pytest.raises(DomainError):
        solve_sigma_for_vvix(-5.0, p, T)


def test_terminal_law_is_cached():
    assert terminal_law(PRESETS["set2"], T) is terminal_law(PRESETS["set2"].replace(rho=0.1), T)
