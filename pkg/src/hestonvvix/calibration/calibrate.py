"""Weighted least-squares Heston calibration with optional VVIX anchoring.

Residuals are w_i (V^_i - V_i) over OTM discounted prices (puts below the
forward, calls at and above it). A differential-evolution search seeds a
damped Gauss-Newton refinement. The VVIX can enter as an extra penalty
residual w_V (VVIX_model - target), in points, or pin sigma outright: in
"solve" mode sigma leaves the decision vector and is recomputed from the
target at every evaluation.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import differential_evolution

from ..errors import DomainError, HestonVvixError, NoBracket
from ..model import HestonParams, MarketConvention
from ..replication import default_vix_option_grid, vvix_by_replication
from ..vix import solve_sigma_for_vvix, vvix_log_contract, vvix_simple
from .pricing import heston_call_prices
from .weights import WeightScheme, build_weights

log = logging.getLogger(__name__)

PARAM_NAMES = ("v0", "kappa", "theta", "rho", "sigma")
BOUNDS = {
    "v0": (1e-4, 2.0),
    "kappa": (1e-3, 20.0),
    "theta": (1e-4, 2.0),
    "rho": (-0.999, 0.999),
    "sigma": (1e-3, 10.0),
}
# residual assigned to every quote when the model cannot be evaluated
FAILED_RESIDUAL = 1e3


@dataclass(frozen=True)
class VvixMode:
    """``kind`` is none, penalty or solve; ``model`` picks log-contract or simple for the penalty."""

    kind: str = "none"
    target: float | None = None
    weight: float = 0.0
    model: str = "log-contract"

    def __post_init__(self):
        if self.kind not in ("none", "penalty", "solve"):
            raise DomainError(f"unknown VVIX mode {self.kind!r}")
        if self.kind != "none" and not (self.target is not None and self.target > 0):
            raise DomainError(f"VVIX target must be > 0, got {self.target}")
        if not self.weight >= 0:
            raise DomainError(f"penalty weight must be >= 0, got {self.weight}")
        if self.model not in ("log-contract", "simple"):
            raise DomainError(f"penalty VVIX model must be 'log-contract' or 'simple', got {self.model!r}")

    @classmethod
    def penalty(cls, weight: float, target: float, model: str = "log-contract") -> "VvixMode":
        return cls("penalty", target, weight, model)

    @classmethod
    def solve(cls, target: float) -> "VvixMode":
        return cls("solve", target)


@dataclass(frozen=True)
class OptimizerSettings:
    population: int = 30
    generations: int = 200
    seed: int = 42
    de_tol: float = 0.01
    workers: int = 1
    gn_max_iter: int = 200
    step_tol: float = 1e-10
    objective_rtol: float = 1e-12
    jacobian_bump: float = 1e-6


@dataclass(frozen=True)
class CalibrationSpec:
    quotes: tuple
    scheme: WeightScheme = field(default_factory=WeightScheme)
    vvix_mode: VvixMode = field(default_factory=VvixMode)
    fixed: dict = field(default_factory=dict)
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    spot: float = 100.0
    conv: MarketConvention = field(default_factory=MarketConvention)

    def __post_init__(self):
        object.__setattr__(self, "quotes", tuple(self.quotes))
        object.__setattr__(self, "fixed", dict(self.fixed))
        bad = set(self.fixed) - {"kappa", "theta"}
        if bad:
            raise DomainError(f"only kappa and theta may be fixed, got {sorted(bad)}")
        for name, value in self.fixed.items():
            lo, hi = BOUNDS[name]
            if not lo <= value <= hi:
                raise DomainError(f"fixed {name}={value} outside [{lo}, {hi}]")
        if not self.spot > 0:
            raise DomainError(f"spot must be > 0, got {self.spot}")

    @property
    def free_names(self) -> tuple[str, ...]:
        drop = set(self.fixed)
        if self.vvix_mode.kind == "solve":
            drop.add("sigma")
        return tuple(n for n in PARAM_NAMES if n not in drop)


@dataclass
class CalibrationResult:
    params: HestonParams
    objective: float
    residuals: np.ndarray
    converged: bool
    message: str
    free_names: tuple
    n_evaluations: int
    gn_iterations: int
    de_objective: float
    infeasible_evaluations: int
    seconds: float
    vvix: dict
    vvix_residual: float | None = None

    @property
    def rms(self) -> float:
        return float(np.sqrt(np.mean(self.residuals**2)))

    def to_dict(self) -> dict:
        return {
            "params": {n: getattr(self.params, n) for n in PARAM_NAMES},
            "objective": self.objective,
            "residual_rms": self.rms,
            "residuals": [float(r) for r in self.residuals],
            "vvix_residual": self.vvix_residual,
            "converged": self.converged,
            "message": self.message,
            "free_parameters": list(self.free_names),
            "evaluations": self.n_evaluations,
            "gauss_newton_iterations": self.gn_iterations,
            "global_objective": self.de_objective,
            "infeasible_evaluations": self.infeasible_evaluations,
            "vvix": self.vvix,
        }

    def to_json(self, timings: bool = False) -> str:
        doc = self.to_dict()
        if timings:
            doc["seconds"] = self.seconds
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


class _Problem:
    """Residual map from the free-parameter vector; quote order is preserved."""

    def __init__(self, spec: CalibrationSpec):
        self.spec = spec
        self.free = spec.free_names
        self.lower = np.array([BOUNDS[n][0] for n in self.free])
        self.upper = np.array([BOUNDS[n][1] for n in self.free])
        conv = spec.conv
        quotes = spec.quotes
        self.weights = build_weights(quotes, spec.scheme, spec.spot, conv)
        self.groups = []
        target = np.empty(len(quotes))
        for T in sorted({q.maturity for q in quotes}):
            idx = np.array([i for i, q in enumerate(quotes) if q.maturity == T])
            fwd = float(conv.forward(spec.spot, T))
            strikes = np.array([quotes[i].strike for i in idx])
            disc = np.array([quotes[i].discount for i in idx])
            put = strikes < fwd
            for i, is_put in zip(idx, put):
                q = quotes[i]
                q.check_bounds(fwd)
                und = q.undiscounted_price
                # parity converts ITM quotes to their OTM counterpart
                if q.is_call and is_put:
                    und = und - fwd + q.strike
                elif not q.is_call and not is_put:
                    und = und + fwd - q.strike
                target[i] = q.discount * und
            self.groups.append((T, idx, fwd, strikes, disc, put))
        self.target = target
        self.n_eval = 0
        self.n_infeasible = 0

    def params_of(self, z) -> HestonParams:
        values = dict(self.spec.fixed)
        values.update(zip(self.free, (float(c) for c in z)))
        if self.spec.vvix_mode.kind == "solve":
            trial = HestonParams(values["v0"], values["kappa"], values["theta"], values["rho"], 1.0)
            values["sigma"] = solve_sigma_for_vvix(
                self.spec.vvix_mode.target, trial, self.spec.conv.delta, self.spec.conv
            )
        return HestonParams(*(values[n] for n in PARAM_NAMES))

    def model_prices(self, params: HestonParams) -> np.ndarray:
        out = np.empty(len(self.target))
        for T, idx, fwd, strikes, disc, put in self.groups:
            calls = heston_call_prices(params, fwd, strikes, T)
            out[idx] = disc * np.where(put, calls - fwd + strikes, calls)
        return out

    def vvix_penalty(self, params: HestonParams) -> float:
        mode = self.spec.vvix_mode
        T = self.spec.conv.delta
        calc = vvix_log_contract if mode.model == "log-contract" else vvix_simple
        return mode.weight * (calc(params, T, self.spec.conv).points - mode.target)

    @property
    def size(self) -> int:
        return len(self.target) + (1 if self.spec.vvix_mode.kind == "penalty" else 0)

    def residuals(self, z) -> np.ndarray:
        self.n_eval += 1
        try:
            params = self.params_of(z)
            r = self.weights * (self.model_prices(params) - self.target)
            if self.spec.vvix_mode.kind == "penalty":
                r = np.append(r, self.vvix_penalty(params))
        except (HestonVvixError, FloatingPointError) as exc:
            self.n_infeasible += 1
            log.debug("infeasible point %s: %s", z, exc)
            return np.full(self.size, FAILED_RESIDUAL)
        if not np.all(np.isfinite(r)):
            self.n_infeasible += 1
            return np.full(self.size, FAILED_RESIDUAL)
        return r

    def objective(self, z) -> float:
        r = self.residuals(z)
        return float(r @ r)

    def jacobian(self, z, bump: float) -> np.ndarray:
        cols = []
        for k in range(len(z)):
            h = bump * max(abs(z[k]), 1e-3)
            zp, zm = z.copy(), z.copy()
            zp[k] = min(z[k] + h, self.upper[k])
            zm[k] = max(z[k] - h, self.lower[k])
            cols.append((self.residuals(zp) - self.residuals(zm)) / (zp[k] - zm[k]))
        return np.column_stack(cols)


def _gauss_newton(problem: _Problem, z0, settings: OptimizerSettings):
    """Levenberg-damped Gauss-Newton inside the box; returns (z, f, iterations, converged, message)."""
    z = np.array(z0, dtype=float)
    r = problem.residuals(z)
    f = float(r @ r)
    lam = 1e-3
    for it in range(1, settings.gn_max_iter + 1):
        J = problem.jacobian(z, settings.jacobian_bump)
        A = J.T @ J
        g = J.T @ r
        scale = np.maximum(np.diag(A), 1e-300)
        while True:
            try:
                step = np.linalg.solve(A + lam * np.diag(scale), -g)
            except np.linalg.LinAlgError:
                step = -g / (lam * scale)
            z_new = np.clip(z + step, problem.lower, problem.upper)
            moved = np.linalg.norm(z_new - z)
            if moved <= settings.step_tol * (np.linalg.norm(z) + settings.step_tol):
                return z, f, it, True, "step below tolerance"
            r_new = problem.residuals(z_new)
            f_new = float(r_new @ r_new)
            if f_new < f:
                break
            lam *= 4.0
            if lam > 1e16:
                return z, f, it, True, "no descent direction left"
        lam = max(lam / 3.0, 1e-12)
        small_change = f - f_new <= settings.objective_rtol * f
        z, r, f = z_new, r_new, f_new
        if small_change:
            return z, f, it, True, "relative objective change below tolerance"
        if f == 0.0:
            return z, f, it, True, "exact fit"
    return z, f, settings.gn_max_iter, False, "Gauss-Newton iteration limit reached"


def vvix_diagnostics(params: HestonParams, conv: MarketConvention | None = None) -> dict:
    """Simple, log-contract and replication VVIX at ``params``; failures become None."""
    conv = conv or MarketConvention()
    T = conv.delta
    calcs = {
        "simple": lambda: vvix_simple(params, T, conv),
        "log_contract": lambda: vvix_log_contract(params, T, conv),
        "replication_k1_5": lambda: vvix_by_replication(params, T, conv, default_vix_option_grid(5.0)),
        "replication_k1_10": lambda: vvix_by_replication(params, T, conv, default_vix_option_grid(10.0)),
    }
    out = {}
    for name, calc in calcs.items():
        try:
            out[name] = calc().points
        except HestonVvixError as exc:
            log.warning("VVIX diagnostic %s failed: %s", name, exc)
            out[name] = None
    return out


def calibrate(spec: CalibrationSpec) -> CalibrationResult:
    """Fit Heston parameters to the quotes of ``spec``.

    Never raises on optimizer trouble: the best point found is returned with
    ``converged=False``. Raises NoBracket if, in solve mode, no evaluated
    point admitted a sigma reproducing the target.
    """
    start = time.perf_counter()
    problem = _Problem(spec)
    dim = len(problem.free)
    if len(spec.quotes) < max(5, dim):
        raise DomainError(f"{len(spec.quotes)} quotes cannot determine {dim} parameters")
    opt = spec.optimizer
    popsize = max(1, math.ceil(opt.population / dim))
    de = differential_evolution(
        problem.objective,
        list(zip(problem.lower, problem.upper)),
        maxiter=opt.generations,
        popsize=popsize,
        tol=opt.de_tol,
        seed=opt.seed,
        polish=False,
        workers=opt.workers,
        updating="deferred" if opt.workers != 1 else "immediate",
    )
    log.info("global search: objective %.6g after %d evaluations", de.fun, de.nfev)
    if de.fun >= FAILED_RESIDUAL**2 and spec.vvix_mode.kind == "solve":
        raise NoBracket(f"no sigma reproduces VVIX target {spec.vvix_mode.target} at any evaluated point")
    z, f, iters, converged, message = _gauss_newton(problem, de.x, opt)
    params = problem.params_of(z)
    r = problem.residuals(z)
    n_quotes = len(spec.quotes)
    result = CalibrationResult(
        params=params,
        objective=f,
        residuals=r[:n_quotes],
        converged=converged,
        message=message,
        free_names=problem.free,
        n_evaluations=problem.n_eval,
        gn_iterations=iters,
        de_objective=float(de.fun),
        infeasible_evaluations=problem.n_infeasible,
        seconds=time.perf_counter() - start,
        vvix=vvix_diagnostics(params, spec.conv),
        vvix_residual=float(r[n_quotes]) if len(r) > n_quotes else None,
    )
    log.info("calibrated %s: objective %.6g (%s) in %.1f s", params, f, message, result.seconds)
    return result


def spec_summary(spec: CalibrationSpec) -> dict:
    return {
        "n_quotes": len(spec.quotes),
        "weights": asdict(spec.scheme),
        "vvix_mode": asdict(spec.vvix_mode),
        "fixed": spec.fixed,
        "optimizer": asdict(spec.optimizer),
        "spot": spec.spot,
    }
