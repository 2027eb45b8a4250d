"""Heston PDE valuation of the VVIX by double replication."""

from .engine import (
    TABLE2_LADDER,
    HestonOperator,
    PayoffStack,
    PdeVvixResult,
    apply_initial_condition,
    continuity_condition,
    intrinsic_stack,
    pde_vvix,
    pde_vvix_detailed,
    rkg_evolve,
    spx_strike_grid,
    strip_from_portfolio,
    strip_portfolio_payoff,
    strip_surface,
)
from .grid import PdeGrid, build_grid
from .operator import apply_stencil_reference, heston_stencil, spectral_radius_bound
from .rkg import amplification, apply_operator, rkg_coefficients, rkg_integrate, stability_interval, stage_count

__all__ = [
    "TABLE2_LADDER",
    "HestonOperator",
    "PayoffStack",
    "PdeGrid",
    "PdeVvixResult",
    "amplification",
    "apply_initial_condition",
    "apply_operator",
    "apply_stencil_reference",
    "build_grid",
    "continuity_condition",
    "heston_stencil",
    "intrinsic_stack",
    "pde_vvix",
    "pde_vvix_detailed",
    "rkg_coefficients",
    "rkg_evolve",
    "rkg_integrate",
    "spectral_radius_bound",
    "spx_strike_grid",
    "stability_interval",
    "stage_count",
    "strip_from_portfolio",
    "strip_portfolio_payoff",
    "strip_surface",
]
