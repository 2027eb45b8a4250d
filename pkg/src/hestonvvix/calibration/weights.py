"""Per-quote weights of the least-squares calibration objective."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..model import MarketConvention
from .pricing import bs_vega

WEIGHT_KINDS = ("uniform", "inverse-discount", "inverse-vega")
_ALIASES = {"discount": "inverse-discount", "vega": "inverse-vega"}


@dataclass(frozen=True)
class WeightScheme:
    """How quotes are weighted.

    ``vega_rule="floor"`` uses 1 / max(vega, vega_floor), capping every weight
    at 1 / vega_floor. ``vega_rule="min"`` evaluates 1 / min(vega_floor, vega)
    literally; it blows up the weight of low-vega wings and is kept for study.
    """

    kind: str = "inverse-vega"
    vega_floor: float = 1e-2
    vega_rule: str = "floor"

    def __post_init__(self):
        object.__setattr__(self, "kind", _ALIASES.get(self.kind, self.kind))
        if self.kind not in WEIGHT_KINDS:
            raise DomainError(f"unknown weight scheme {self.kind!r}; expected one of {WEIGHT_KINDS}")
        if not self.vega_floor > 0:
            raise DomainError(f"vega floor must be > 0, got {self.vega_floor}")
        if self.vega_rule not in ("floor", "min"):
            raise DomainError(f"vega rule must be 'floor' or 'min', got {self.vega_rule!r}")


def build_weights(quotes, scheme: WeightScheme, spot: float = 100.0,
                  conv: MarketConvention | None = None) -> np.ndarray:
    """Weight vector aligned with ``quotes``."""
    conv = conv or MarketConvention()
    n = len(quotes)
    if scheme.kind == "uniform":
        return np.ones(n)
    if scheme.kind == "inverse-discount":
        return np.array([1.0 / q.discount for q in quotes])
    missing = [i for i, q in enumerate(quotes) if q.implied_vol is None]
    if missing:
        raise DomainError(f"inverse-vega weights need implied vols; missing for quote(s) {missing[:10]}")
    vega = np.array([
        bs_vega(float(conv.forward(spot, q.maturity)), q.strike, q.maturity, q.implied_vol, q.discount)
        for q in quotes
    ])
    if scheme.vega_rule == "floor":
        return 1.0 / np.maximum(vega, scheme.vega_floor)
    return 1.0 / np.minimum(vega, scheme.vega_floor)
