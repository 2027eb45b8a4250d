"""Discrete variance-strip replication (the CBOE VIX/VVIX construction).

For a forward F, strikes K_1 < ... < K_n and out-of-the-money prices V_i,

    variance * tenor = 2 sum_i dK_i / K_i^2 V_i - (F / K* - 1)^2

with dK_i the central strike spacing (one-sided at both ends) and K* the
largest strike at or below F. Puts are used below K*, calls from K* up.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NoKStar
from .model import HestonParams, MarketConvention
from .vix import IndexQuote, terminal_law, vix_option

DEFAULT_KMAX = 150.0
DEFAULT_DK = 0.5
# forwards this close below a strike (relative) select that strike as K*
KSTAR_RTOL = 1e-12


def k_star_indices(strikes: np.ndarray, forwards):
    """Index of the largest strike at or below each forward (-1 if none).

    Regression noise of a few ulps must not move K* to the next strike down.
    """
    return np.searchsorted(strikes, np.asarray(forwards, dtype=float) * (1.0 + KSTAR_RTOL), side="right") - 1


@dataclass(frozen=True)
class StrikeGrid:
    strikes: np.ndarray = field(repr=False)

    def __post_init__(self):
        k = np.asarray(self.strikes, dtype=float)
        if k.ndim != 1 or k.size < 3:
            raise DomainError("a strike grid needs at least three strikes")
        if not np.all(np.diff(k) > 0) or k[0] <= 0:
            raise DomainError("strikes must be positive and strictly ascending")
        object.__setattr__(self, "strikes", k)

    def __len__(self):
        return self.strikes.size

    @property
    def spacing(self) -> np.ndarray:
        k = self.strikes
        dk = np.empty_like(k)
        dk[1:-1] = 0.5 * (k[2:] - k[:-2])
        dk[0] = k[1] - k[0]
        dk[-1] = k[-1] - k[-2]
        return dk

    @property
    def weights(self) -> np.ndarray:
        """dK_i / K_i^2, the per-strike weights entering ``2 sum w_i V_i``."""
        return self.spacing / self.strikes**2

    @property
    def printed_weights(self) -> np.ndarray:
        """(K_{i+1} - K_i) / (2 K_i^2), with a backward difference at the top strike."""
        k = self.strikes
        fwd = np.empty_like(k)
        fwd[:-1] = np.diff(k)
        fwd[-1] = k[-1] - k[-2]
        return fwd / (2.0 * k**2)

    def k_star_index(self, forward: float) -> int:
        i = int(k_star_indices(self.strikes, forward))
        if i < 0:
            raise NoKStar(f"forward {forward:.6g} lies below the lowest strike {self.strikes[0]:.6g}")
        return i

    def to_json(self) -> str:
        return json.dumps(self.strikes.tolist())

    @classmethod
    def from_json(cls, text: str) -> "StrikeGrid":
        return cls(np.asarray(json.loads(text), dtype=float))

    @classmethod
    def uniform(cls, lo: float, hi: float, step: float) -> "StrikeGrid":
        n = int(round((hi - lo) / step))
        return cls(lo + step * np.arange(n + 1))


@dataclass(frozen=True)
class VarStripResult:
    variance: float
    vix_points: float
    k_star: float
    truncation_diag: tuple[float, float]
    floored: bool = False


def default_vix_option_grid(k1: float, kmax: float = DEFAULT_KMAX, dk: float = DEFAULT_DK) -> StrikeGrid:
    """VIX option strikes from ``k1`` to ``kmax`` every ``dk`` points."""
    return StrikeGrid.uniform(k1, kmax, dk)


def select_otm(strikes, k_star_index, calls, puts):
    """Puts strictly below K*, calls at and above it (last axis = strikes)."""
    idx = np.arange(np.shape(strikes)[-1])
    below = idx < np.asarray(k_star_index)[..., None]
    return np.where(below, puts, calls)


def strip_variance(forward: float, grid: StrikeGrid, otm_prices, tenor: float) -> VarStripResult:
    """Annualized variance of the discrete strip; floored at zero."""
    otm = np.asarray(otm_prices, dtype=float)
    if otm.shape != grid.strikes.shape:
        raise DomainError(f"{otm.size} prices for {len(grid)} strikes")
    if not forward > 0:
        raise DomainError(f"forward must be > 0, got {forward}")
    if not tenor > 0:
        raise DomainError(f"tenor must be > 0, got {tenor}")
    i = grid.k_star_index(forward)
    k_star = grid.strikes[i]
    contrib = 2.0 * grid.weights * otm
    raw = (math.fsum(contrib) - (forward / k_star - 1.0) ** 2) / tenor
    floored = raw < 0
    var = max(raw, 0.0)
    return VarStripResult(
        variance=var,
        vix_points=100.0 * math.sqrt(var),
        k_star=float(k_star),
        truncation_diag=(float(contrib[0] / tenor), float(contrib[-1] / tenor)),
        floored=floored,
    )


def strip_variance_many(forwards, strikes, calls, puts, tenor: float):
    """Vectorized strip over many forwards (one row per node).

    Rows whose forward lies below the lowest strike use that strike as K*
    and are flagged. Returns (variance floored at 0, no-K* flags, floor flags).
    """
    grid = strikes if isinstance(strikes, StrikeGrid) else StrikeGrid(strikes)
    k = grid.strikes
    forwards = np.asarray(forwards, dtype=float)
    idx = k_star_indices(k, forwards)
    no_k_star = idx < 0
    idx = np.maximum(idx, 0)
    otm = select_otm(k, idx, calls, puts)
    k_star = k[idx]
    raw = (2.0 * (otm @ grid.weights) - (forwards / k_star - 1.0) ** 2) / tenor
    floored = raw < 0
    return np.maximum(raw, 0.0), no_k_star, floored


def vvix_by_replication(
    params: HestonParams,
    T: float,
    conv: MarketConvention | None = None,
    vix_grid: StrikeGrid | None = None,
) -> IndexQuote:
    """VVIX from the discrete strip of model VIX option prices."""
    grid = vix_grid or default_vix_option_grid(10.0)
    forward = terminal_law(params, T, conv).future
    i_star = grid.k_star_index(forward)
    otm = np.array([
        vix_option(params, k, T, -1 if j < i_star else 1, conv) for j, k in enumerate(grid.strikes)
    ])
    return IndexQuote(strip_variance(forward, grid, otm, T).vix_points, T)
