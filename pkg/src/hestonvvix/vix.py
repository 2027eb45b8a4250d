"""VIX futures, VIX options and the VVIX from the variance law alone.

The VIX at time T is modelled by the expected 30-day variance,
``VIX_T = 100 sqrt(vix_squared_heston(v_T, delta))``, and v_T follows the
exact CIR transition ``v_T = c1 Z`` with ``Z ~ chi'^2_d(lam(v0))``. Every
quantity here is a one-dimensional integral against the density of Z, or a
closed form (``vvix_simple``).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NegativeVariance, NoBracket, NonMonotone
from .model import (
    HestonParams,
    MarketConvention,
    averaging_factor,
    cir_transition,
    expected_variance,
    second_moment_variance_paper,
)
from .numerics import QuadratureSpec, integrate, ncx2_pdf, ncx2_pdf_edgeworth, ncx2_quantile

TAIL_PROBABILITY = 1e-10
SIGMA_BRACKET = (1e-4, 20.0)
# beyond these the series distribution function is too long; the law is
# then so concentrated that moment bounds are used instead
_MOMENT_BOUNDS_LIMIT = 1e5
_MOMENT_BOUNDS_WIDTH = 40.0
# past this d + lam the exact density is noisier than its Edgeworth expansion
_EDGEWORTH_LIMIT = 1e7


@dataclass(frozen=True)
class IndexQuote:
    """Index level in CBOE points (100 x annualized volatility)."""

    points: float
    tenor: float

    def __post_init__(self):
        if not self.points >= 0:
            raise DomainError(f"index points must be >= 0, got {self.points}")

    @property
    def vol(self) -> float:
        return self.points / 100.0


class TerminalVixLaw:
    """Law of VIX_T under the exact CIR transition over [0, T].

    Holds the transition constants, the integration range and the
    quadrature settings shared by futures, options and the log contract.
    """

    def __init__(self, v0, kappa, theta, sigma, T, delta, spec: QuadratureSpec | None = None):
        if not T > 0:
            raise DomainError(f"maturity must be > 0, got {T}")
        params = HestonParams(v0, kappa, theta, 0.0, sigma)
        tr = cir_transition(params, T)
        self.params = params
        self.T = T
        self.delta = delta
        self.c1 = tr.c1
        self.d = tr.d
        self.lam = float(tr.lambda_of(v0))
        self.b = averaging_factor(kappa, delta)
        self.a = (1.0 - self.b) * theta
        self.singular = self.d < 2.0

        mean = self.d + self.lam
        sd = math.sqrt(2.0 * (self.d + 2.0 * self.lam))
        # pre-split points so that no integrand vanishing at the mode can
        # slip between the nodes of one wide initial panel
        self.breaks = mean + sd * np.array([-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0])
        if self.lam > _MOMENT_BOUNDS_LIMIT or self.d > _MOMENT_BOUNDS_LIMIT:
            self.z_lo = max(0.0, mean - _MOMENT_BOUNDS_WIDTH * sd)
            self.z_hi = mean + _MOMENT_BOUNDS_WIDTH * sd
        else:
            self.z_lo = 0.0
            self.z_hi = ncx2_quantile(TAIL_PROBABILITY, self.d, self.lam, upper=True)
        base = spec or QuadratureSpec()
        if self.singular:
            median = ncx2_quantile(0.5, self.d, self.lam)
            self.spec_at_zero = QuadratureSpec(
                rel_tol=base.rel_tol,
                abs_tol=base.abs_tol,
                max_subdivisions=base.max_subdivisions,
                left_singularity_flag=True,
                singular_exponent=0.5 * self.d,
                singular_width=median,
            )
        else:
            self.spec_at_zero = base
        self.spec = base

    def vix(self, z):
        """VIX_T in points when Z = z."""
        return 100.0 * np.sqrt(self.a + self.b * self.c1 * z)

    def pdf(self, z):
        if self.d + self.lam > _EDGEWORTH_LIMIT:
            return ncx2_pdf_edgeworth(z, self.d, self.lam)
        return ncx2_pdf(z, self.d, self.lam)

    def kink(self, strike: float) -> float:
        """The z at which VIX_T equals ``strike`` points (may be negative)."""
        return ((strike / 100.0) ** 2 - self.a) / (self.b * self.c1)

    def expect(self, g, lo: float | None = None, hi: float | None = None) -> float:
        """Integral of g(z) * pdf(z) over [lo, hi] within the truncated range."""
        lo = self.z_lo if lo is None else max(lo, self.z_lo)
        hi = self.z_hi if hi is None else min(hi, self.z_hi)
        if hi <= lo:
            return 0.0
        inner = self.breaks[(self.breaks > lo) & (self.breaks < hi)]
        edges = np.concatenate([[lo], inner, [hi]])

        def h(z):
            return g(z) * self.pdf(z)

        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            total += integrate(h, float(a), float(b), self.spec_at_zero if a == 0.0 else self.spec)
        return total

    @functools.cached_property
    def future(self) -> float:
        return self.expect(self.vix)


@functools.lru_cache(maxsize=512)
def _law(v0, kappa, theta, sigma, T, delta) -> TerminalVixLaw:
    return TerminalVixLaw(v0, kappa, theta, sigma, T, delta)


def terminal_law(params: HestonParams, T: float, conv: MarketConvention | None = None) -> TerminalVixLaw:
    conv = conv or MarketConvention()
    return _law(params.v0, params.kappa, params.theta, params.sigma, float(T), conv.delta)


def vix_future(params: HestonParams, T: float, conv: MarketConvention | None = None) -> IndexQuote:
    """F_VIX(0, T) = E[VIX_T] in points."""
    return IndexQuote(terminal_law(params, T, conv).future, T)


def vix_option(params: HestonParams, K: float, T: float, eta: int = 1, conv: MarketConvention | None = None) -> float:
    """Undiscounted VIX call (eta=+1) or put (eta=-1) price in points.

    The integral is split at the kink where VIX_T = K so each piece has a
    smooth integrand.
    """
    if K < 0:
        raise DomainError(f"strike must be >= 0, got {K}")
    if eta not in (1, -1):
        raise DomainError("eta must be +1 (call) or -1 (put)")
    law = terminal_law(params, T, conv)
    z_star = max(law.kink(K), 0.0)
    if eta == 1:
        if z_star == 0.0:
            return law.future - K if K == 0.0 else law.expect(lambda z: law.vix(z) - K)
        return law.expect(lambda z: law.vix(z) - K, lo=z_star)
    if z_star == 0.0:
        return 0.0
    return law.expect(lambda z: K - law.vix(z), hi=z_star)


def _log1p_minus(u):
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1e-4
    # series -u^2/2 + u^3/3 - u^4/4 where log1p(u) - u cancels
    series = u * u * (-0.5 + u * (1.0 / 3.0 - 0.25 * u))
    return np.where(small, series, np.log1p(np.where(small, 0.0, u)) - u)


def vvix_log_contract(params: HestonParams, T: float, conv: MarketConvention | None = None) -> IndexQuote:
    """VVIX^2 = -(2/T) E[ln(VIX_T / F_VIX)], reported in points."""
    law = terminal_law(params, T, conv)
    f = law.future
    # ln(1 + u) - u with u = VIX/F - 1 has the same mean (E[u] = 0) but is
    # never positive, so tiny vol-of-vol does not cancel into a negative variance
    mean_log_return = law.expect(lambda z: _log1p_minus(law.vix(z) / f - 1.0))
    var = -2.0 / T * mean_log_return
    if var < 0:
        raise NegativeVariance(f"log-contract VVIX^2 is negative ({var:.3g}) for {params}")
    return IndexQuote(100.0 * math.sqrt(var), T)


def _vvix_simple_points(v0, kappa, theta, sigma, T, delta, variant="flipped"):
    """Vectorized in sigma; returns points and the Taylor variance of VIX^2."""
    sigma = np.asarray(sigma, dtype=float)
    b = averaging_factor(kappa, delta)
    a = (1.0 - b) * theta
    ev = theta + (v0 - theta) * math.exp(-kappa * T)
    s = sigma**2 / (2.0 * kappa)
    e = math.exp(-kappa * T)
    if variant == "printed":
        ev2 = (s + theta + e * (s + theta - v0)) ** 2
    elif variant == "flipped":
        ev2 = (s + theta + e * (v0 - theta - s)) ** 2
    else:
        raise ValueError(f"unknown variant {variant!r}")
    m2 = a + b * ev
    m4 = a * a + 2.0 * a * b * ev + b * b * ev2
    var2 = m4 - m2 * m2
    var_vix = np.maximum(var2, 0.0) / (4.0 * m2)
    points = 100.0 * np.sqrt(np.log1p(var_vix / m2)) / math.sqrt(delta)
    return points, var2, m2


def vvix_simple(
    params: HestonParams, T: float, conv: MarketConvention | None = None, variant: str = "flipped"
) -> IndexQuote:
    """Closed-form lognormal VVIX approximation (no numerical integration).

    E[VIX^2] comes from the exact mean of v_T, E[VIX^4] from the approximate
    second moment of :func:`second_moment_variance_paper`; a first-order
    Taylor expansion of the square root turns Var[VIX^2] into Var[VIX].
    """
    conv = conv or MarketConvention()
    if not T > 0:
        raise DomainError(f"maturity must be > 0, got {T}")
    points, var2, m2 = _vvix_simple_points(
        params.v0, params.kappa, params.theta, params.sigma, T, conv.delta, variant
    )
    if var2 < -1e-12 * m2 * m2:
        ev = expected_variance(params, params.v0, T)
        ev2 = second_moment_variance_paper(params, T, variant)
        raise NegativeVariance(
            f"Taylor variance of VIX^2 is negative ({float(var2):.3g}); "
            f"E[v_T]={ev:.6g}, E[v_T^2]~{ev2:.6g}"
        )
    return IndexQuote(float(points), T)


def solve_sigma_for_vvix(
    target: IndexQuote | float,
    params: HestonParams,
    T: float,
    conv: MarketConvention | None = None,
    bracket: tuple[float, float] = SIGMA_BRACKET,
    variant: str = "flipped",
    xtol: float = 1e-13,
) -> float:
    """Vol-of-vol at which :func:`vvix_simple` hits ``target``.

    ``params.sigma`` is ignored. Safeguarded Newton iteration with a
    numerical derivative, falling back to bisection whenever a step leaves
    the current bracket.
    """
    conv = conv or MarketConvention()
    tgt = target.points if isinstance(target, IndexQuote) else float(target)
    if not tgt > 0:
        raise DomainError(f"VVIX target must be > 0, got {tgt}")
    lo, hi = bracket
    v0, kappa, theta = params.v0, params.kappa, params.theta

    def f(s):
        return _vvix_simple_points(v0, kappa, theta, s, T, conv.delta, variant)[0] - tgt

    grid = np.geomspace(lo, hi, 65)
    values = f(grid)
    if not np.all(np.diff(values) > 0):
        raise NonMonotone(f"simple VVIX is not increasing in sigma on [{lo}, {hi}] for {params}")
    if values[0] > 0 or values[-1] < 0:
        raise NoBracket(
            f"target {tgt} outside [{values[0] + tgt:.4g}, {values[-1] + tgt:.4g}] "
            f"reachable for sigma in [{lo}, {hi}]"
        )
    k = int(np.searchsorted(values, 0.0))
    if values[k] == 0.0:
        return float(grid[k])
    a, b = float(grid[k - 1]), float(grid[k])
    x = 0.5 * (a + b)
    for _ in range(100):
        fx = float(f(x))
        if fx == 0.0:
            return x
        if fx < 0:
            a = x
        else:
            b = x
        h = 1e-6 * x
        slope = float(f(x + h) - f(x - h)) / (2.0 * h)
        step = fx / slope if slope > 0 else math.inf
        x_new = x - step
        if not a < x_new < b:
            x_new = 0.5 * (a + b)
        if abs(x_new - x) <= xtol * x or b - a <= xtol * b:
            return x_new
        x = x_new
    return x
