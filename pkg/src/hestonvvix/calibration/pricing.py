"""European options under Heston by Fourier inversion, plus Black helpers.

Undiscounted call prices follow the single-integral (Lewis) representation

    C = F - sqrt(F K) / pi * int_0^inf Re[exp(i u k) phi(u - i/2)] / (u^2 + 1/4) du

with k = ln(F / K) and phi the characteristic function of ln(S_T / F_T) in
its continuous ("little trap") form. The characteristic function depends on
the maturity only, so one set of evaluations serves every strike.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr

from ..errors import DomainError, IntegrationError, NoBracket
from ..model import HestonParams, MarketConvention

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_TRUNCATION_TOL = 1e-15
_MAX_PANELS = 8000


def _log1p_complex(z):
    # numpy's complex log1p loses the real part for |z| << 1
    x, y = z.real, z.imag
    return 0.5 * np.log1p(x * (2.0 + x) + y * y) + 1j * np.arctan2(y, 1.0 + x)


def heston_cf(u, params: HestonParams, T: float):
    """E[exp(i u ln(S_T / F_T))] for complex u.

    Written with m = (xi - d) / sigma^2 = -(u^2 + i u) / (xi + d) so that the
    deterministic-variance limit sigma -> 0 stays free of cancellation.
    """
    u = np.asarray(u, dtype=complex)
    kappa, theta, sigma, rho, v0 = params.kappa, params.theta, params.sigma, params.rho, params.v0
    s2 = sigma * sigma
    xi = kappa - 1j * rho * sigma * u
    d = np.sqrt(xi * xi + s2 * (u * u + 1j * u))
    m = -(u * u + 1j * u) / (xi + d)
    g = s2 * m / (xi + d)
    e = np.exp(-d * T)
    log_term = (_log1p_complex(-g * e) - _log1p_complex(-g)) / s2
    c = kappa * theta * (m * T - 2.0 * log_term)
    dd = m * (1.0 - e) / (1.0 - g * e)
    return np.exp(c + dd * v0)


def _integration_nodes(params: HestonParams, T: float, k_max: float):
    """Composite Gauss-Legendre nodes on [0, U] with U set by the decay of phi."""
    def envelope(u):
        return np.abs(heston_cf(u - 0.5j, params, T)) / (u * u + 0.25)

    upper = 1.0
    while envelope(upper) > _TRUNCATION_TOL or envelope(2.0 * upper) > _TRUNCATION_TOL:
        upper *= 2.0
        if upper > 1e7:
            raise IntegrationError(f"characteristic function does not decay for {params}, T={T}")
    # panels grow geometrically away from the poles of 1/(u^2 + 1/4) at +-i/2,
    # capped at half an oscillation of exp(i u k)
    width = min(upper / 16.0, math.pi / max(k_max, 1e-3))
    edges = [0.0]
    h = 0.125
    while edges[-1] < upper:
        h = min(2.0 * h, width)
        edges.append(min(edges[-1] + h, upper))
        if len(edges) > _MAX_PANELS:
            raise IntegrationError(f"too many quadrature panels for {params}, T={T}")
    edges = np.asarray(edges)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_NODES).ravel()
    weights = (half[:, None] * _GL_WEIGHTS).ravel()
    return nodes, weights


def heston_call_prices(params: HestonParams, forward: float, strikes, T: float) -> np.ndarray:
    """Undiscounted calls for one maturity and many strikes."""
    strikes = np.atleast_1d(np.asarray(strikes, dtype=float))
    if not T > 0 or np.any(strikes <= 0) or not forward > 0:
        raise DomainError("maturity, strikes and forward must be positive")
    k = np.log(forward / strikes)
    nodes, weights = _integration_nodes(params, T, float(np.max(np.abs(k))))
    phi = heston_cf(nodes - 0.5j, params, T) / (nodes * nodes + 0.25)
    integral = (np.cos(np.outer(k, nodes)) * phi.real - np.sin(np.outer(k, nodes)) * phi.imag) @ weights
    calls = forward - np.sqrt(forward * strikes) / math.pi * integral
    if not np.all(np.isfinite(calls)):
        raise IntegrationError(f"non-finite Heston price for {params}, T={T}")
    lower = np.maximum(forward - strikes, 0.0)
    return np.clip(calls, lower, forward)


def heston_vanilla_price(
    params: HestonParams,
    conv: MarketConvention | None,
    K,
    T: float,
    is_call=True,
    spot: float = 100.0,
):
    """Undiscounted European price; puts from parity."""
    conv = conv or MarketConvention()
    forward = float(conv.forward(spot, T))
    K = np.asarray(K, dtype=float)
    calls = heston_call_prices(params, forward, K.ravel(), T).reshape(K.shape)
    out = np.where(is_call, calls, calls - forward + K)
    return float(out) if out.ndim == 0 else out


def black_price(forward, strike, T, vol, is_call=True):
    """Undiscounted Black price."""
    forward, strike, vol = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (forward, strike, vol)))
    sd = vol * math.sqrt(T)
    with np.errstate(divide="ignore", invalid="ignore"):
        d1 = np.log(forward / strike) / sd + 0.5 * sd
    call = np.where(sd > 0, forward * ndtr(d1) - strike * ndtr(d1 - sd), np.maximum(forward - strike, 0.0))
    out = np.where(is_call, call, call - forward + strike)
    return float(out) if out.ndim == 0 else out


def bs_vega(forward, strike, T, sigma_impl, discount=1.0):
    """B F phi(ln(F/K) / (sigma sqrt T) + sigma sqrt T / 2) sqrt T."""
    sd = np.asarray(sigma_impl, dtype=float) * math.sqrt(T)
    d1 = np.log(np.asarray(forward, dtype=float) / strike) / sd + 0.5 * sd
    out = discount * forward * np.exp(-0.5 * d1 * d1) / math.sqrt(2.0 * math.pi) * math.sqrt(T)
    return float(out) if np.ndim(out) == 0 else out


def implied_vol(price: float, forward: float, strike: float, T: float, is_call: bool = True,
                lo: float = 1e-6, hi: float = 10.0, tol: float = 1e-12) -> float:
    """Black implied volatility of an undiscounted price by bracketed root finding."""
    def f(s):
        return black_price(forward, strike, T, s, is_call) - price

    f_lo, f_hi = f(lo), f(hi)
    if f_lo > 0 or f_hi < 0:
        raise NoBracket(f"price {price} outside the Black range for K={strike}, T={T}")
    return brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200)
