"""Monte Carlo oracle for variance-process quantities.

Only the terminal variance is sampled, straight from the exact CIR
transition, so estimates carry no discretization bias. Paths are drawn in
fixed-size chunks, each from its own SeedSequence child, and concatenated in
chunk order: a given (seed, n_paths) always reproduces the same estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .model import HestonParams, MarketConvention, averaging_factor, cir_transition
from .numerics import ncx2_sample

CHUNK = 1 << 17
MIN_PATHS = 1000


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_paths: int
    seed: int

    def __post_init__(self):
        if not self.std_error >= 0:
            raise DomainError(f"standard error must be >= 0, got {self.std_error}")

    def within(self, value: float, n_se: float = 3.0) -> bool:
        return abs(self.mean - value) <= n_se * self.std_error


def sample_terminal_variance(params: HestonParams, T: float, n_paths: int, seed: int) -> np.ndarray:
    """n_paths exact draws of v_T given v_0."""
    if n_paths < MIN_PATHS:
        raise DomainError(f"need at least {MIN_PATHS} paths, got {n_paths}")
    tr = cir_transition(params, T)
    lam = float(tr.lambda_of(params.v0))
    sizes = [CHUNK] * (n_paths // CHUNK)
    if n_paths % CHUNK:
        sizes.append(n_paths % CHUNK)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    parts = [tr.c1 * ncx2_sample(tr.d, lam, np.random.default_rng(ss), n) for ss, n in zip(children, sizes)]
    return np.concatenate(parts)


def sample_vix(params: HestonParams, T: float, conv: MarketConvention | None, n_paths: int, seed: int) -> np.ndarray:
    """VIX_T in points for each sampled path."""
    conv = conv or MarketConvention()
    b = averaging_factor(params.kappa, conv.delta)
    v = sample_terminal_variance(params, T, n_paths, seed)
    return 100.0 * np.sqrt((1.0 - b) * params.theta + b * v)


def _estimate(x: np.ndarray, n_paths: int, seed: int) -> McEstimate:
    return McEstimate(float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(len(x))), n_paths, seed)


def mc_vix_future(params: HestonParams, T: float, conv: MarketConvention | None = None,
                  n_paths: int = 1_000_000, seed: int = 0) -> McEstimate:
    return _estimate(sample_vix(params, T, conv, n_paths, seed), n_paths, seed)


def mc_vix_option(params: HestonParams, K: float, T: float, eta: int = 1, conv: MarketConvention | None = None,
                  n_paths: int = 1_000_000, seed: int = 0) -> McEstimate:
    """Undiscounted VIX call (eta=1) or put (eta=-1) struck at K points."""
    if eta not in (1, -1):
        raise DomainError(f"eta must be +1 or -1, got {eta}")
    vix = sample_vix(params, T, conv, n_paths, seed)
    return _estimate(np.maximum(eta * (vix - K), 0.0), n_paths, seed)


def mc_vvix_log(params: HestonParams, T: float, conv: MarketConvention | None = None,
                n_paths: int = 1_000_000, seed: int = 0) -> McEstimate:
    """Log-contract VVIX in points; the future is the sample mean of the same paths.

    The standard error follows from the delta method applied to
    g = mean(ln VIX) - ln(mean VIX) and VVIX = 100 sqrt(-2 g / T).
    """
    vix = sample_vix(params, T, conv, n_paths, seed)
    log_vix = np.log(vix)
    m_vix = float(np.mean(vix))
    g = float(np.mean(log_vix)) - math.log(m_vix)
    var2 = -2.0 * g / T
    if var2 <= 0:
        raise DomainError(f"sampled log-contract variance is not positive ({var2:.3g})")
    cov = np.cov(log_vix, vix)
    grad = np.array([1.0, -1.0 / m_vix])
    se_g = math.sqrt(max(float(grad @ cov @ grad), 0.0) / n_paths)
    vvix = 100.0 * math.sqrt(var2)
    dvvix_dg = 100.0 / (T * math.sqrt(var2))
    return McEstimate(vvix, dvvix_dg * se_g, n_paths, seed)


def mc_variance_moment(params: HestonParams, tau: float, power: int = 1,
                       n_paths: int = 1_000_000, seed: int = 0) -> McEstimate:
    """E[v_tau ** power] by exact sampling."""
    v = sample_terminal_variance(params, tau, n_paths, seed)
    return _estimate(v**power, n_paths, seed)
