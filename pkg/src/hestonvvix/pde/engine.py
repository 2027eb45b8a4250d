"""VVIX by double replication on the two-dimensional Heston PDE.

Backward in time: SPX calls and puts are evolved from T + delta to T, turned
into VIX option payoffs node by node (forward from the parity regression,
VIX from the SPX strip), evolved from T to 0, and finally reduced once more to
a VVIX surface whose spline is read at (spot, v0).

Every surface solves the same linear equation between the two events, and
the payoffs satisfy parity, so the evolved puts are P_i = C_i - U + K_i D with
U the evolved underlying and D the evolved unit claim. Two evaluation methods
follow from this:

* ``"stack"`` evolves the call surfaces plus U and D (or all 2n surfaces with
  ``parity_reduction=False``) and applies the regression and strip to them;
* ``"portfolio"`` evolves only sum_i w_i C_i, U and D. The strip needs no
  more: sum_i w_i OTM_i = sum_i w_i C_i + sum_{K_i < K*} w_i (K_i D - U), and
  the parity regression of G_i = U - K_i D is linear in (U, D). The result
  equals the stack method's to rounding, at a cost independent of n.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError
from ..model import HestonParams, MarketConvention
from ..numerics import ParityRegression, spline2d_eval, spline2d_fit
from ..replication import StrikeGrid, default_vix_option_grid, k_star_indices, strip_variance_many
from ..vix import IndexQuote
from .grid import DEFAULT_V_CONCENTRATION, PdeGrid, build_grid
from .operator import heston_stencil, spectral_radius_bound
from .rkg import EvolveReport, rkg_integrate

log = logging.getLogger(__name__)

SPX_STRIKE_RANGE = (0.4, 1.4)
SPX_STRIKE_COUNT = 1001
READOUT_X = (0.5, 1.5)
READOUT_V_THETAS = 4.0
TABLE2_LADDER = ((25, 12, 16), (50, 25, 30), (100, 50, 60), (200, 100, 120), (400, 200, 240))


@dataclass
class PayoffStack:
    """2n surfaces on the grid: calls at ``strikes`` in [..., :n], puts in [..., n:]."""

    values: np.ndarray = field(repr=False)  # (nx, nv, 2n)
    strikes: np.ndarray

    def __post_init__(self):
        self.strikes = np.asarray(self.strikes, dtype=float)
        if self.values.ndim != 3 or self.values.shape[2] != 2 * self.strikes.size:
            raise DomainError("a payoff stack holds one call and one put surface per strike")

    @property
    def n(self) -> int:
        return self.strikes.size

    @property
    def calls(self) -> np.ndarray:
        return self.values[:, :, : self.n]

    @property
    def puts(self) -> np.ndarray:
        return self.values[:, :, self.n :]


def spx_strike_grid(spot: float, count: int = SPX_STRIKE_COUNT, lo: float = SPX_STRIKE_RANGE[0],
                    hi: float = SPX_STRIKE_RANGE[1]) -> StrikeGrid:
    """``count`` SPX strikes uniform between ``lo`` and ``hi`` times spot."""
    return StrikeGrid(spot * np.linspace(lo, hi, count))


def intrinsic_stack(underlying: np.ndarray, strikes) -> PayoffStack:
    """Call and put intrinsic values of ``underlying`` (any 2-D node array)."""
    k = np.asarray(strikes, dtype=float)
    u = underlying[:, :, None]
    return PayoffStack(np.concatenate([np.maximum(u - k, 0.0), np.maximum(k - u, 0.0)], axis=2), k)


def apply_initial_condition(grid: PdeGrid, spx_strikes) -> PayoffStack:
    """SPX call and put payoffs at T + delta on every node."""
    strikes = spx_strikes.strikes if isinstance(spx_strikes, StrikeGrid) else spx_strikes
    x = np.broadcast_to(grid.x[:, None], grid.shape)
    return intrinsic_stack(x, strikes)


class HestonOperator:
    """Stencil and spectral bound of the discrete Heston operator on a grid."""

    def __init__(self, grid: PdeGrid, params: HestonParams, conv: MarketConvention):
        self.grid = grid
        self.coef = heston_stencil(grid, params, conv)
        self.rho = spectral_radius_bound(self.coef)


def rkg_evolve(
    stack: PayoffStack,
    t_from: float,
    t_to: float,
    n_steps: int,
    operator: HestonOperator,
    parity_reduction: bool = True,
) -> tuple[PayoffStack, EvolveReport]:
    """Backward induction of every surface from ``t_from`` down to ``t_to``."""
    if not t_from > t_to:
        raise DomainError(f"backward induction needs t_from > t_to, got {t_from} <= {t_to}")
    duration = t_from - t_to
    label = f"[{t_to:.5g}, {t_from:.5g}]"
    n = stack.n
    if not parity_reduction:
        out, report = rkg_integrate(operator.coef, operator.rho, stack.values, duration, n_steps, label)
        return PayoffStack(out, stack.strikes), report
    calls, puts, k = stack.calls, stack.puts, stack.strikes
    under = calls[:, :, 0] - puts[:, :, 0] + k[0]
    # the reduction is exact only if every pair already satisfies parity
    gap = np.max(np.abs(calls - puts + k - under[:, :, None]))
    if gap > 1e-9 * max(1.0, float(np.max(np.abs(stack.values)))):
        log.debug("parity gap %.3g at %s; evolving the full stack", gap, label)
        return rkg_evolve(stack, t_from, t_to, n_steps, operator, parity_reduction=False)
    reduced = np.concatenate([calls, under[:, :, None], np.ones(under.shape + (1,))], axis=2)
    out, report = rkg_integrate(operator.coef, operator.rho, reduced, duration, n_steps, label)
    c, u, d = out[:, :, :n], out[:, :, n], out[:, :, n + 1]
    p = c - u[:, :, None] + k * d[:, :, None]
    return PayoffStack(np.concatenate([c, p], axis=2), k), report


@dataclass(frozen=True)
class StripSurface:
    """Per-node forward and strip index from a stack of option surfaces."""

    forward: np.ndarray
    slope: np.ndarray
    points: np.ndarray
    no_k_star: np.ndarray
    floored: np.ndarray


def strip_surface(stack: PayoffStack, grid: StrikeGrid, tenor: float) -> StripSurface:
    """(i) forward from the parity regression, (ii) index level from the strip."""
    if stack.n != len(grid) or not np.allclose(stack.strikes, grid.strikes, rtol=0, atol=0):
        raise DomainError("stack strikes and strike grid differ")
    g = stack.calls - stack.puts
    beta1, beta2 = ParityRegression(grid.strikes).solve(g)
    shape = g.shape[:2]
    var, no_k, floored = strip_variance_many(
        beta2.ravel(), grid, stack.calls.reshape(-1, stack.n), stack.puts.reshape(-1, stack.n), tenor
    )
    return StripSurface(beta2, beta1, 100.0 * np.sqrt(var).reshape(shape),
                        no_k.reshape(shape), floored.reshape(shape))


def continuity_condition(
    stack: PayoffStack, spx_grid: StrikeGrid, vix_grid: StrikeGrid, conv: MarketConvention
) -> tuple[PayoffStack, StripSurface]:
    """Replace SPX option surfaces at T by VIX option payoffs at T.

    Nodes whose forward falls below the lowest SPX strike use that strike as
    K* and are flagged in the returned surface.
    """
    vix = strip_surface(stack, spx_grid, conv.delta)
    n_flag = int(vix.no_k_star.sum())
    if n_flag:
        log.debug("continuity: %d nodes with forward below the lowest SPX strike", n_flag)
    return intrinsic_stack(vix.points, vix_grid.strikes), vix


def strip_portfolio_payoff(underlying: np.ndarray, grid: StrikeGrid) -> np.ndarray:
    """(sum_i w_i max(u - K_i, 0), u, 1) on every node, stacked on the last axis."""
    k, w = grid.strikes, grid.weights
    cw = np.concatenate([[0.0], np.cumsum(w)])
    cwk = np.concatenate([[0.0], np.cumsum(w * k)])
    j = np.searchsorted(k, underlying, side="left")  # strikes strictly below u
    calls = underlying * cw[j] - cwk[j]
    return np.stack([np.maximum(calls, 0.0), underlying, np.ones_like(underlying)], axis=-1)


def strip_from_portfolio(values: np.ndarray, grid: StrikeGrid, tenor: float) -> StripSurface:
    """Regression forward and strip index from evolved (sum w C, U, D) surfaces."""
    calls, under, unit = values[..., 0], values[..., 1], values[..., 2]
    k, w = grid.strikes, grid.weights
    reg = ParityRegression(k)
    # G_i = C_i - P_i = U - K_i D, and the regression is linear in G
    on_one = reg.solve(np.ones_like(k))
    on_k = reg.solve(k)
    beta1 = under * on_one[0] - unit * on_k[0]
    beta2 = under * on_one[1] - unit * on_k[1]
    idx = k_star_indices(k, beta2)
    no_k = idx < 0
    idx = np.maximum(idx, 0)
    cw = np.concatenate([[0.0], np.cumsum(w)])
    cwk = np.concatenate([[0.0], np.cumsum(w * k)])
    otm_sum = calls + unit * cwk[idx] - under * cw[idx]
    raw = (2.0 * otm_sum - (beta2 / k[idx] - 1.0) ** 2) / tenor
    return StripSurface(beta2, beta1, 100.0 * np.sqrt(np.maximum(raw, 0.0)), no_k, raw < 0)


@dataclass(frozen=True)
class PdeVvixResult:
    vvix: IndexQuote
    grid: PdeGrid = field(repr=False)
    vvix_surface: np.ndarray = field(repr=False)
    vix_surface: np.ndarray = field(repr=False)
    vix_future: float
    flagged_nodes: int
    stages: tuple[int, int]
    seconds: float


def pde_vvix_detailed(
    params: HestonParams,
    conv: MarketConvention | None = None,
    spot: float = 100.0,
    M: int = 200,
    L: int = 240,
    N: int = 400,
    spx_grid: StrikeGrid | None = None,
    vix_grid: StrikeGrid | None = None,
    T: float | None = None,
    parity_reduction: bool = True,
    x_max_stddevs: float = 6.0,
    v_max_multiple: float = 5.0,
    v_concentration: float | None = DEFAULT_V_CONCENTRATION,
    method: str = "portfolio",
) -> PdeVvixResult:
    conv = conv or MarketConvention()
    if conv.r_c != 0.0:
        raise DomainError("the double replication uses undiscounted prices (r_C = 0)")
    if method not in ("portfolio", "stack"):
        raise DomainError(f"unknown PDE method {method!r}")
    start = time.perf_counter()
    spx_grid = spx_grid or spx_strike_grid(spot)
    vix_grid = vix_grid or default_vix_option_grid(10.0)
    grid = build_grid(params, conv, M, L, N, spot, T, x_max_stddevs, v_max_multiple, v_concentration)
    op = HestonOperator(grid, params, conv)
    horizon = grid.T + grid.delta

    if method == "stack":
        stack = apply_initial_condition(grid, spx_grid)
        stack, rep1 = rkg_evolve(stack, horizon, grid.T, grid.n_first, op, parity_reduction)
        stack, vix = continuity_condition(stack, spx_grid, vix_grid, conv)
        stack, rep2 = rkg_evolve(stack, grid.T, 0.0, grid.n_second, op, parity_reduction)
        vvix = strip_surface(stack, vix_grid, grid.T)
    else:
        x = np.ascontiguousarray(np.broadcast_to(grid.x[:, None], grid.shape))
        values, rep1 = rkg_integrate(op.coef, op.rho, strip_portfolio_payoff(x, spx_grid),
                                     grid.delta, grid.n_first, "SPX leg")
        vix = strip_from_portfolio(values, spx_grid, conv.delta)
        values, rep2 = rkg_integrate(op.coef, op.rho, strip_portfolio_payoff(vix.points, vix_grid),
                                     grid.T, grid.n_second, "VIX leg")
        vvix = strip_from_portfolio(values, vix_grid, grid.T)

    value, fut = _readout(grid, params, vvix.points, vvix.forward)
    elapsed = time.perf_counter() - start
    log.info("PDE VVIX %.4f (N=%d M=%d L=%d, stages %d/%d) in %.1fs",
             value, N, M, L, rep1.stages, rep2.stages, elapsed)
    return PdeVvixResult(
        vvix=IndexQuote(value, grid.T),
        grid=grid,
        vvix_surface=vvix.points,
        vix_surface=vix.points,
        vix_future=fut,
        flagged_nodes=int(vix.no_k_star.sum()),
        stages=(rep1.stages, rep2.stages),
        seconds=elapsed,
    )


def _readout(grid: PdeGrid, params: HestonParams, points: np.ndarray, forward: np.ndarray):
    x, v = grid.x, grid.v
    ix = np.nonzero((x >= READOUT_X[0] * grid.spot) & (x <= READOUT_X[1] * grid.spot))[0]
    # the box must contain v0 even when v0 > 4 theta
    v_hi = max(READOUT_V_THETAS * params.theta, v[min(np.searchsorted(v, params.v0) + 1, v.size - 1)])
    iv = np.nonzero(v <= v_hi)[0]
    if ix.size < 4 or iv.size < 4:
        raise DomainError("grid too coarse for the spline readout box")
    xs, vs = x[ix], v[iv]
    sub = np.ix_(ix, iv)
    value = spline2d_eval(spline2d_fit(xs, vs, points[sub]), grid.spot, params.v0)
    fut = spline2d_eval(spline2d_fit(xs, vs, forward[sub]), grid.spot, params.v0)
    return float(value), float(fut)


def pde_vvix(
    params: HestonParams,
    conv: MarketConvention | None = None,
    spot: float = 100.0,
    M: int = 200,
    L: int = 240,
    N: int = 400,
    spx_grid: StrikeGrid | None = None,
    vix_grid: StrikeGrid | None = None,
    **kwargs,
) -> IndexQuote:
    """VVIX at (spot, v0) by double replication on an (N, M, L) grid."""
    return pde_vvix_detailed(params, conv, spot, M, L, N, spx_grid, vix_grid, **kwargs).vvix
