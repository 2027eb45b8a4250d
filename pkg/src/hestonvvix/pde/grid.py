"""(x, v) grids and the time partition of the double replication.

The asset axis is uniform. The variance axis is uniform or, by default,
concentrated near v = 0 with the map v_j = c sinh(j / L * asinh(v_max / c)):
with the Feller condition violated, VIX options with low strikes have their
kinks within the first cell of a uniform axis and converge only to first
order there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError
from ..model import HestonParams, MarketConvention

DEFAULT_V_CONCENTRATION = 0.05


@dataclass(frozen=True)
class PdeGrid:
    """M+1 asset nodes, L+1 variance nodes and N time steps over [0, T + delta].

    ``n_first`` steps cover the SPX leg [T, T + delta] and ``n_second`` the VIX
    leg [0, T].
    """

    x: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    n_steps: int
    n_first: int
    n_second: int
    T: float
    delta: float
    spot: float
    x_max_stddevs: float = 6.0

    @property
    def M(self) -> int:
        return self.x.size - 1

    @property
    def L(self) -> int:
        return self.v.size - 1

    @property
    def dx(self) -> float:
        """Smallest asset spacing."""
        return float(np.min(np.diff(self.x)))

    @property
    def dv(self) -> float:
        """Smallest variance spacing."""
        return float(np.min(np.diff(self.v)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.x.size, self.v.size


def build_grid(
    params: HestonParams,
    conv: MarketConvention,
    M: int,
    L: int,
    N: int,
    spot: float,
    T: float | None = None,
    x_max_stddevs: float = 6.0,
    v_max_multiple: float = 5.0,
    v_concentration: float | None = DEFAULT_V_CONCENTRATION,
) -> PdeGrid:
    """Grid on [0, x_max] x [0, v_max].

    x_max = spot * exp(x_max_stddevs * sqrt(theta (T + delta))) and
    v_max = v_max_multiple * max(theta, v0). ``v_concentration`` is c / v_max
    of the sinh map; None gives a uniform variance axis. The N steps are
    shared between the two legs in proportion to their lengths.
    """
    if M < 4 or L < 4:
        raise DomainError(f"grid needs M, L >= 4, got M={M}, L={L}")
    if N < 2:
        raise DomainError(f"grid needs N >= 2 time steps, got {N}")
    if not spot > 0:
        raise DomainError(f"spot must be > 0, got {spot}")
    if v_max_multiple < 5.0:
        raise DomainError("v_max must be at least 5 max(theta, v0)")
    T = conv.delta if T is None else float(T)
    horizon = T + conv.delta
    x_max = spot * math.exp(x_max_stddevs * math.sqrt(params.theta * horizon))
    v_max = v_max_multiple * max(params.theta, params.v0)
    if v_concentration is None:
        v = np.linspace(0.0, v_max, L + 1)
    else:
        if not v_concentration > 0:
            raise DomainError(f"v_concentration must be > 0, got {v_concentration}")
        c = v_concentration * v_max
        v = c * np.sinh(np.linspace(0.0, 1.0, L + 1) * np.arcsinh(v_max / c))
        v[-1] = v_max
    n_first = min(max(int(round(N * conv.delta / horizon)), 1), N - 1)
    return PdeGrid(
        x=np.linspace(0.0, x_max, M + 1),
        v=v,
        n_steps=N,
        n_first=n_first,
        n_second=N - n_first,
        T=T,
        delta=conv.delta,
        spot=float(spot),
        x_max_stddevs=x_max_stddevs,
    )
