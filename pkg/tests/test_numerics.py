import math

import numpy as np
import pytest
from scipy import stats
from scipy.special import gammaln, logsumexp

from hestonvvix.errors import DomainError, IntegrationError, NonConvergence
from hestonvvix.numerics import (
    ParityRegression,
    QuadratureSpec,
    integrate,
    ncx2_cdf,
    ncx2_pdf,
    ncx2_pdf_edgeworth,
    ncx2_quantile,
    ncx2_sample,
    solve_parity_regression,
    spline2d_eval,
    spline2d_fit,
)


def series_pdf(z, d, lam, terms=2000):
    """Poisson mixture of central chi-squared densities, summed in log space."""
    j = np.arange(terms)
    log_w = stats.poisson.logpmf(j, lam / 2.0) if lam > 0 else np.where(j == 0, 0.0, -np.inf)
    return np.exp(logsumexp(log_w + stats.chi2.logpdf(z, d + 2.0 * j)))


def singular_spec(d, lam):
    return QuadratureSpec(rel_tol=1e-11, abs_tol=0.0, left_singularity_flag=d < 2, singular_exponent=d / 2,
                          singular_width=ncx2_quantile(0.5, d, lam))


# --- ncx2 density ----------------------------------------------------------

@pytest.mark.parametrize("d", [0.22, 0.88, 2.0, 5.0])
def test_central_density(d):
    z = np.array([0.5, 1.0, 5.0])
    expected = np.exp((d / 2 - 1) * np.log(z) - z / 2 - d / 2 * math.log(2) - gammaln(d / 2))
    np.testing.assert_allclose(ncx2_pdf(z, d, 0.0), expected, rtol=1e-13)


def test_density_matches_series():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(300):
        d, lam = rng.uniform(0.1, 10), rng.choice([0.0, rng.uniform(0, 200)])
        z = math.exp(rng.uniform(math.log(1e-6), math.log(500)))
        ref = series_pdf(z, d, lam)
        if ref < 1e-290:
            continue
        worst = max(worst, abs(float(ncx2_pdf(z, d, lam)) / ref - 1))
    assert worst < 1e-10


def test_density_matches_scipy():
    z = np.linspace(0.01, 60, 200)
    for d, lam in [(0.2233, 3.0), (0.88, 30.0), (5.0, 1.0)]:
        np.testing.assert_allclose(ncx2_pdf(z, d, lam), stats.ncx2.pdf(z, d, lam), rtol=1e-8)


def test_density_singular_behaviour_and_errors():
    d = 0.5
    z = np.array([1e-8, 1e-10])
    ratio = ncx2_pdf(z, d, 2.0) / z ** (d / 2 - 1)
    assert ratio[0] == pytest.approx(ratio[1], rel=1e-6)
    assert np.isinf(ncx2_pdf(0.0, d, 2.0))
    with pytest.raises(DomainError):
        ncx2_pdf(-1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        ncx2_pdf(1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        ncx2_pdf(1.0, 1.0, -1.0)


@pytest.mark.parametrize("d", [0.22, 0.88, 5.0])
@pytest.mark.parametrize("lam", [0.0, 1.0, 50.0])
def test_normalization_and_mean(d, lam):
    spec = singular_spec(d, lam)
    hi = ncx2_quantile(1e-16, d, lam, upper=True)
    mass = integrate(lambda z: ncx2_pdf(z, d, lam), 0.0, hi, spec)
    mean = integrate(lambda z: z * ncx2_pdf(z, d, lam), 0.0, hi, spec)
    assert mass == pytest.approx(1.0, abs=1e-8)
    assert mean == pytest.approx(d + lam, rel=1e-8)


def test_cdf_and_quantile_against_scipy():
    for d, lam in [(0.2233, 6.0), (0.88, 0.5), (4.0, 40.0)]:
        z = np.array([0.01, 1.0, 10.0, 50.0])
        np.testing.assert_allclose(ncx2_cdf(z, d, lam), stats.ncx2.cdf(z, d, lam), rtol=1e-8, atol=1e-14)
        for p in (1e-3, 0.5, 0.99):
            assert ncx2_cdf(ncx2_quantile(p, d, lam), d, lam) == pytest.approx(p, rel=1e-9)


def test_edgeworth_density_close_to_exact_for_large_parameters():
    d, lam = 3e6, 4e6
    sd = math.sqrt(2 * (d + 2 * lam))
    z = d + lam + sd * np.linspace(-4, 4, 9)
    np.testing.assert_allclose(ncx2_pdf_edgeworth(z, d, lam), ncx2_pdf(z, d, lam), rtol=1e-6)


# --- sampling ----------------------------------------------------------------

@pytest.mark.parametrize("d,lam", [(0.2233, 7.0), (0.88, 0.0), (5.0, 20.0)])
def test_sample_mean_and_variance(d, lam):
    n = 1_000_000
    x = ncx2_sample(d, lam, np.random.default_rng(5), n)
    k2, k4 = 2 * (d + 2 * lam), 48 * (d + 4 * lam)
    assert abs(x.mean() - (d + lam)) < 4 * math.sqrt(k2 / n)
    assert abs(x.var(ddof=1) - k2) < 4 * math.sqrt((k4 + 2 * k2 * k2) / n)


def test_sample_exponential_case_ks():
    x = ncx2_sample(2.0, 0.0, np.random.default_rng(9), 100_000)
    assert stats.kstest(x, stats.expon(scale=2.0).cdf).pvalue > 0.01


@pytest.mark.parametrize("d,lam", [(0.2233, 7.0), (0.88, 2.0), (3.0, 10.0)])
def test_sample_ks_against_series_cdf(d, lam):
    x = ncx2_sample(d, lam, np.random.default_rng(13), 100_000)
    assert stats.kstest(x, lambda z: ncx2_cdf(z, d, lam)).pvalue > 0.01


def test_sample_reproducible():
    a = ncx2_sample(0.5, 3.0, np.random.default_rng(1), 1000)
    b = ncx2_sample(0.5, 3.0, np.random.default_rng(1), 1000)
    assert np.array_equal(a, b)


# --- quadrature --------------------------------------------------------------

def test_integrate_basic():
    assert integrate(lambda z: 3 * z * z, 0.0, 1.0) == pytest.approx(1.0, rel=1e-14)
    assert integrate(lambda z: np.exp(-z), 0.0, math.inf) == pytest.approx(1.0, abs=1e-10)
    assert integrate(lambda z: z, 2.0, 2.0) == 0.0


def test_integrate_feller_violating_density():
    d, lam = 0.2233, 5.0
    hi = ncx2_quantile(1e-12, d, lam, upper=True)
    mass = integrate(lambda z: ncx2_pdf(z, d, lam), 0.0, hi, singular_spec(d, lam))
    assert mass == pytest.approx(float(ncx2_cdf(hi, d, lam)), abs=1e-8)
    assert mass == pytest.approx(1.0, abs=1e-8)


def test_integrate_tiny_singular_exponent():
    # s^(1/p) underflows for p = 0.005 while the mass below 1e-300 is ~3%
    d, lam = 0.01, 3.0
    hi = ncx2_quantile(1e-14, d, lam, upper=True)
    mass = integrate(lambda z: ncx2_pdf(z, d, lam), 0.0, hi, singular_spec(d, lam))
    assert mass == pytest.approx(1.0, abs=1e-8)


def test_integrate_deterministic():
    f = lambda z: np.sin(30 * z) ** 2 * np.exp(-z)  # noqa: E731
    assert integrate(f, 0.0, 10.0) == integrate(f, 0.0, 10.0)


def test_integrate_errors():
    with pytest.raises(NonConvergence) as info:
        integrate(lambda z: np.sin(1 / z), 1e-9, 1.0, QuadratureSpec(rel_tol=1e-14, abs_tol=0.0, max_subdivisions=8))
    assert math.isfinite(info.value.estimate)
    with pytest.raises(IntegrationError):
        integrate(lambda z: np.where(z > 0.5, np.nan, 1.0), 0.0, 1.0)
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0.0)


# --- parity regression -------------------------------------------------------

def test_parity_exact_line_and_two_points():
    k = np.linspace(50, 150, 11)
    b1, b2 = solve_parity_regression(k, -k + 7)
    assert b1 == pytest.approx(-1, abs=1e-12) and b2 == pytest.approx(7, abs=1e-10)
    b1, b2 = solve_parity_regression([1.0, 3.0], [2.0, 8.0])
    assert b1 == pytest.approx(3.0) and b2 == pytest.approx(-1.0)


def test_parity_on_heston_prices():
    from hestonvvix.calibration import heston_vanilla_price
    from hestonvvix.model import PRESETS

    k = np.linspace(40, 140, 100)
    p = PRESETS["set1"]
    g = heston_vanilla_price(p, None, k, 0.5, True) - heston_vanilla_price(p, None, k, 0.5, False)
    b1, b2 = solve_parity_regression(k, g)
    assert b1 == pytest.approx(-1, rel=1e-6) and b2 == pytest.approx(100.0, rel=1e-6)


def test_parity_residual_orthogonal_and_batched():
    rng = np.random.default_rng(3)
    k = np.sort(rng.uniform(10, 200, 40))
    g = rng.normal(size=(5, 40))
    reg = ParityRegression(k)
    b1, b2 = reg.solve(g)
    resid = b1[:, None] * k + b2[:, None] - g
    assert np.all(np.abs(resid @ reg.design) < 1e-9 * np.linalg.norm(g, axis=1)[:, None])
    with pytest.raises(DomainError):
        ParityRegression([5.0, 5.0, 5.0])


# --- spline ------------------------------------------------------------------

def test_spline_reproduces_bilinear_and_knots():
    x = np.array([0.0, 0.3, 1.0, 1.7, 2.5])
    y = np.array([-1.0, 0.0, 0.4, 2.0])
    f = lambda a, b: 2 * a + 3 * b - 1  # noqa: E731
    s = spline2d_fit(x, y, f(x[:, None], y[None, :]))
    rng = np.random.default_rng(0)
    px, py = rng.uniform(0, 2.5, 100), rng.uniform(-1, 2, 100)
    np.testing.assert_allclose(spline2d_eval(s, px, py), f(px, py), atol=1e-12)
    vals = rng.normal(size=(5, 4))
    s = spline2d_fit(x, y, vals)
    np.testing.assert_allclose(spline2d_eval(s, x[:, None], y[None, :]), vals, atol=1e-12)


def test_spline_smooth_function_accuracy():
    x = y = np.linspace(0, 1, 50)
    s = spline2d_fit(x, y, np.sin(x)[:, None] * np.cos(y)[None, :])
    px, py = np.meshgrid(np.linspace(0.1, 0.9, 81), np.linspace(0.1, 0.9, 81))
    assert np.max(np.abs(spline2d_eval(s, px, py) - np.sin(px) * np.cos(py))) < 1e-6


def test_spline_c2_interior():
    x = np.linspace(0, 1, 8)
    y = np.linspace(0, 1, 6)
    s = spline2d_fit(x, y, np.random.default_rng(2).normal(size=(8, 6)))
    h = 1e-4
    for xi in x[2:-2]:
        second = [(spline2d_eval(s, xi + e + h, 0.5) - 2 * spline2d_eval(s, xi + e, 0.5)
                   + spline2d_eval(s, xi + e - h, 0.5)) / h**2 for e in (-3 * h, 3 * h)]
        assert second[0] == pytest.approx(second[1], rel=1e-2, abs=1e-3)


def test_spline_out_of_domain():
    s = spline2d_fit([0, 1, 2], [0, 1, 2], np.zeros((3, 3)))
    with pytest.raises(DomainError):
        spline2d_eval(s, 2.5, 1.0)
    with pytest.raises(DomainError):
        spline2d_fit([0, 0, 1], [0, 1, 2], np.zeros((3, 3)))
