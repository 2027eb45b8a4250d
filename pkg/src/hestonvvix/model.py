"""Heston parameters, market conventions and moments of the variance process.

The variance follows the square-root (CIR) diffusion

    dv = kappa (theta - v) dt + sigma sqrt(v) dW_v

and everything in this module depends on the variance law only: the
correlation ``rho`` and the rates never enter.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import DomainError

DAYS_PER_YEAR = 365.0
VIX_TENOR = 30.0 / DAYS_PER_YEAR

# below this kappa*tau the closed forms lose digits to cancellation
_SERIES_CUTOFF = 1e-8


@dataclass(frozen=True)
class HestonParams:
    v0: float
    kappa: float
    theta: float
    rho: float
    sigma: float

    def __post_init__(self):
        for name in ("v0", "kappa", "theta", "rho", "sigma"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.v0 < 0:
            raise DomainError(f"v0 must be >= 0, got {self.v0}")
        if self.kappa <= 0:
            raise DomainError(f"kappa must be > 0, got {self.kappa}")
        if self.theta <= 0:
            raise DomainError(f"theta must be > 0, got {self.theta}")
        if self.sigma <= 0:
            raise DomainError(f"sigma must be > 0, got {self.sigma}")
        if not -1.0 <= self.rho <= 1.0:
            raise DomainError(f"rho must lie in [-1, 1], got {self.rho}")

    @property
    def feller_2kt(self) -> bool:
        """Standard Feller condition 2 kappa theta >= sigma^2."""
        return 2.0 * self.kappa * self.theta >= self.sigma**2

    @property
    def feller_paper(self) -> bool:
        """The stricter form kappa theta >= sigma^2."""
        return self.kappa * self.theta >= self.sigma**2

    @property
    def dof(self) -> float:
        """Degrees of freedom 4 kappa theta / sigma^2 of the CIR transition."""
        return 4.0 * self.kappa * self.theta / self.sigma**2

    def replace(self, **changes) -> "HestonParams":
        return replace(self, **changes)

    def as_array(self) -> np.ndarray:
        return np.array([self.v0, self.kappa, self.theta, self.rho, self.sigma])

    @classmethod
    def from_array(cls, x) -> "HestonParams":
        return cls(*(float(c) for c in x))


@dataclass(frozen=True)
class MarketConvention:
    """Flat-rate market setup; all times are ACT/365 year fractions."""

    delta: float = VIX_TENOR
    r: float = 0.0
    q: float = 0.0
    r_c: float = 0.0
    day_count: str = field(default="ACT/365", compare=False)

    def __post_init__(self):
        if not self.delta > 0:
            raise DomainError(f"delta must be > 0, got {self.delta}")

    def discount_factor(self, t):
        """exp(-r_C t), the PDE discounting."""
        return np.exp(-self.r_c * np.asarray(t, dtype=float))

    def forward(self, spot, t):
        return spot * np.exp((self.r - self.q) * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class CirTransition:
    """Exact transition v(t+tau) = c1 * chi'^2_d(lambda_of(v(t)))."""

    c1: float
    d: float
    lambda_factor: float

    def lambda_of(self, v):
        return self.lambda_factor * np.asarray(v, dtype=float)

    def mean(self, v):
        return self.c1 * (self.d + self.lambda_of(v))

    def variance(self, v):
        return 2.0 * self.c1**2 * (self.d + 2.0 * self.lambda_of(v))


# The six parameter sets of the VVIX truncation table.
PRESETS = {
    "set1": HestonParams(0.0236, 0.2575, 0.0849, -0.7513, 0.3150),
    "set2": HestonParams(0.0313, 0.75, 0.0678, -0.7663, 0.7593),
    "set3": HestonParams(0.0371, 3.4490, 0.0497, -0.7558, 1.7522),
    "set4": HestonParams(0.0538, 0.6431, 0.0880, -0.7010, 0.6159),
    "set5": HestonParams(0.0440, 0.75, 0.0998, -0.7410, 0.7654),
    "set6": HestonParams(0.0397, 4.6705, 0.0696, -0.7149, 2.0640),
}


def _one_minus_exp(x):
    # 1 - exp(-x) without cancellation for small x
    return -np.expm1(-x)


def averaging_factor(kappa: float, tau: float) -> float:
    """B = (1 - exp(-kappa tau)) / (kappa tau), the weight of v in VIX^2."""
    x = kappa * tau
    if x < _SERIES_CUTOFF:
        return 1.0 - x / 2.0 + x * x / 6.0
    return float(_one_minus_exp(x) / x)


def vix_squared_heston(v, tau: float, params: HestonParams):
    """Expected average variance over [t, t+tau] given v(t) = v.

    Affine in ``v``: (1 - B) theta + B v.
    """
    if not tau > 0:
        raise DomainError(f"tau must be > 0, got {tau}")
    v = np.asarray(v, dtype=float)
    if np.any(v < 0):
        raise DomainError("variance must be >= 0")
    b = averaging_factor(params.kappa, tau)
    out = (1.0 - b) * params.theta + b * v
    return float(out) if out.ndim == 0 else out


def expected_variance(params: HestonParams, v_t, tau: float):
    """E[v(t+tau) | v(t) = v_t] = theta + (v_t - theta) exp(-kappa tau)."""
    if tau < 0:
        raise DomainError(f"tau must be >= 0, got {tau}")
    v_t = np.asarray(v_t, dtype=float)
    # v e^{-k tau} + theta (1 - e^{-k tau}) returns v_t exactly at tau = 0
    out = v_t * math.exp(-params.kappa * tau) + params.theta * float(_one_minus_exp(params.kappa * tau))
    return float(out) if out.ndim == 0 else out


def second_moment_variance_paper(params: HestonParams, tau: float, variant: str = "printed") -> float:
    """Approximate E[v(tau)^2] used by the simple VVIX formula.

    ``variant="printed"`` is the closed form as typeset,
    ``[s + theta + e^{-kappa tau} (s + theta - v0)]^2`` with s = sigma^2/(2 kappa).
    ``variant="flipped"`` flips the sign of the transient,
    ``[s + theta + e^{-kappa tau} (v0 - theta - s)]^2``, which is the form that
    reproduces the published "Simple" VVIX column.
    """
    if tau < 0:
        raise DomainError(f"tau must be >= 0, got {tau}")
    s = params.sigma**2 / (2.0 * params.kappa)
    e = math.exp(-params.kappa * tau)
    if variant == "printed":
        root = s + params.theta + e * (s + params.theta - params.v0)
    elif variant == "flipped":
        root = s + params.theta + e * (params.v0 - params.theta - s)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return root * root


def exact_second_moment_cir(params: HestonParams, v_t, tau: float):
    """Exact E[v(t+tau)^2 | v(t) = v_t] of the CIR process."""
    if tau < 0:
        raise DomainError(f"tau must be >= 0, got {tau}")
    k, th, s2 = params.kappa, params.theta, params.sigma**2
    e = math.exp(-k * tau)
    om = float(_one_minus_exp(k * tau))
    v_t = np.asarray(v_t, dtype=float)
    var = v_t * (s2 / k) * e * om + th * (s2 / (2.0 * k)) * om * om
    mean = expected_variance(params, v_t, tau)
    out = var + mean * mean
    return float(out) if np.ndim(out) == 0 else out


def cir_transition(params: HestonParams, tau: float) -> CirTransition:
    if not tau > 0:
        raise DomainError(f"tau must be > 0, got {tau}")
    k, s2 = params.kappa, params.sigma**2
    om = float(_one_minus_exp(k * tau))
    c1 = s2 * om / (4.0 * k)
    lam_factor = 4.0 * k * math.exp(-k * tau) / (s2 * om)
    return CirTransition(c1=c1, d=params.dof, lambda_factor=lam_factor)


# --- serialization ---------------------------------------------------------

_CONV_KEYS = {"r": "r", "q": "q", "rC": "r_c", "delta": "delta"}


def params_to_dict(params: HestonParams, conv: MarketConvention | None = None) -> dict:
    out = asdict(params)
    if conv is not None:
        out.update({"r": conv.r, "q": conv.q, "rC": conv.r_c, "delta": conv.delta})
    return out


def params_from_dict(doc: dict) -> tuple[HestonParams, MarketConvention]:
    try:
        params = HestonParams(*(float(doc[k]) for k in ("v0", "kappa", "theta", "rho", "sigma")))
    except KeyError as exc:
        raise DomainError(f"parameter document is missing {exc.args[0]!r}") from None
    conv_kw = {attr: float(doc[key]) for key, attr in _CONV_KEYS.items() if key in doc}
    return params, MarketConvention(**conv_kw)


def load_params(source: str) -> tuple[HestonParams, MarketConvention]:
    """Resolve a preset name (``set1`` ... ``set6``) or a JSON file path."""
    key = source.lower()
    if key in PRESETS:
        return PRESETS[key], MarketConvention()
    path = Path(source)
    if not path.is_file():
        raise DomainError(f"{source!r} is neither a preset ({', '.join(PRESETS)}) nor a file")
    return params_from_dict(json.loads(path.read_text()))


def dump_params(params: HestonParams, conv: MarketConvention | None = None) -> str:
    return json.dumps(params_to_dict(params, conv), indent=2, sort_keys=True)
