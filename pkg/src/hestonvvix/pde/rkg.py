"""Second-order Runge-Kutta-Gegenbauer super-time-stepping.

An s-stage step of the RKG2 scheme is stable for real eigenvalues of
dt * L in [-(s + 4)(s - 1)/3, 0], so a step of any length only costs about
sqrt(3 dt rho) operator evaluations, rho being the spectral radius of L.
The stage recursion is

    Y_1 = Y_0 + mu~_1 dt L Y_0
    Y_j = mu_j Y_{j-1} + nu_j Y_{j-2} + (1 - mu_j - nu_j) Y_0
          + mu~_j dt L Y_{j-1} + gamma~_j dt L Y_0,   j = 2..s

with coefficients built from the Gegenbauer polynomials C_j^(3/2).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numba
import numpy as np

from ..errors import DomainError, PdeInstability

log = logging.getLogger(__name__)

INSTABILITY_FACTOR = 10.0


@dataclass(frozen=True)
class RkgCoefficients:
    s: int
    mu: np.ndarray
    nu: np.ndarray
    mu_tilde: np.ndarray
    gamma_tilde: np.ndarray

    @property
    def stability_interval(self) -> float:
        return stability_interval(self.s)


def stability_interval(s: int) -> float:
    return (s + 4) * (s - 1) / 3.0


def stage_count(dt_rho: float) -> int:
    """Smallest s >= 2 whose real stability interval covers ``dt_rho``."""
    if not dt_rho >= 0:
        raise DomainError(f"dt * rho must be >= 0, got {dt_rho}")
    # (s + 4)(s - 1) >= 3 dt rho  <=>  s >= (-3 + sqrt(25 + 12 dt rho)) / 2
    s = max(2, math.ceil((-3.0 + math.sqrt(25.0 + 12.0 * dt_rho)) / 2.0 - 1e-12))
    while stability_interval(s) < dt_rho:
        s += 1
    return s


def rkg_coefficients(s: int) -> RkgCoefficients:
    if s < 2:
        raise DomainError(f"RKG2 needs at least two stages, got {s}")
    j = np.arange(s + 1, dtype=float)
    b = np.empty(s + 1)
    jj = j[2:]
    b[2:] = 4.0 * (jj + 4.0) * (jj - 1.0) / (3.0 * jj * (jj + 1.0) * (jj + 2.0) * (jj + 3.0))
    b[0] = b[1] = b[2]
    a = 1.0 - b * (j + 1.0) * (j + 2.0) / 2.0
    w1 = 6.0 / ((s + 4.0) * (s - 1.0))
    mu = np.zeros(s + 1)
    nu = np.zeros(s + 1)
    mu_t = np.zeros(s + 1)
    gam_t = np.zeros(s + 1)
    mu_t[1] = 3.0 * b[1] * w1
    for k in range(2, s + 1):
        mu[k] = (2.0 * k + 1.0) / k * b[k] / b[k - 1]
        nu[k] = -(k + 1.0) / k * b[k] / b[k - 2]
        mu_t[k] = mu[k] * w1
        gam_t[k] = -a[k - 1] * mu_t[k]
    return RkgCoefficients(s, mu, nu, mu_t, gam_t)


def amplification(z, s: int):
    """Stability polynomial R_s(z) of the scheme applied to y' = lambda y, z = dt lambda."""
    c = rkg_coefficients(s)
    z = np.asarray(z, dtype=complex)
    y0 = np.ones_like(z)
    y_prev2 = y0
    y_prev = y0 + c.mu_tilde[1] * z * y0
    for k in range(2, s + 1):
        y = (c.mu[k] * y_prev + c.nu[k] * y_prev2 + (1.0 - c.mu[k] - c.nu[k]) * y0
             + c.mu_tilde[k] * z * y_prev + c.gamma_tilde[k] * z * y0)
        y_prev2, y_prev = y_prev, y
    return y_prev


@numba.njit(cache=True)
def _apply(coef, f, out):
    nx, nv, ns = f.shape
    for i in range(nx):
        for j in range(nv):
            for k in range(ns):
                out[i, j, k] = 0.0
            for a in range(3):
                ii = i + a - 1
                if ii < 0 or ii >= nx:
                    continue
                for b in range(3):
                    jj = j + b - 1
                    if jj < 0 or jj >= nv:
                        continue
                    w = coef[i, j, 3 * a + b]
                    if w == 0.0:
                        continue
                    for k in range(ns):
                        out[i, j, k] += w * f[ii, jj, k]
            w = coef[i, j, 9]
            if w != 0.0 and j + 2 < nv:
                for k in range(ns):
                    out[i, j, k] += w * f[i, j + 2, k]


@numba.njit(cache=True)
def _stage(coef, y1, y2, y0, ly0, out, mu, nu, mu_dt, gam_dt):
    nx, nv, ns = y1.shape
    c0 = 1.0 - mu - nu
    for i in range(nx):
        for j in range(nv):
            for k in range(ns):
                out[i, j, k] = mu * y1[i, j, k] + nu * y2[i, j, k] + c0 * y0[i, j, k] + gam_dt * ly0[i, j, k]
            for a in range(3):
                ii = i + a - 1
                if ii < 0 or ii >= nx:
                    continue
                for b in range(3):
                    jj = j + b - 1
                    if jj < 0 or jj >= nv:
                        continue
                    w = coef[i, j, 3 * a + b]
                    if w == 0.0:
                        continue
                    w *= mu_dt
                    for k in range(ns):
                        out[i, j, k] += w * y1[ii, jj, k]
            w = coef[i, j, 9]
            if w != 0.0 and j + 2 < nv:
                w *= mu_dt
                for k in range(ns):
                    out[i, j, k] += w * y1[i, j + 2, k]


@numba.njit(cache=True)
def _first_stage(y0, ly0, out, mu_dt):
    nx, nv, ns = y0.shape
    for i in range(nx):
        for j in range(nv):
            for k in range(ns):
                out[i, j, k] = y0[i, j, k] + mu_dt * ly0[i, j, k]


@numba.njit(cache=True)
def _max_abs(f):
    m = 0.0
    for x in f.ravel():
        ax = abs(x)
        if not ax <= m:  # also catches NaN
            if ax != ax:
                return np.inf
            m = ax
    return m


def apply_operator(coef: np.ndarray, f: np.ndarray) -> np.ndarray:
    """L f for a stack of surfaces shaped (nx, nv, n_surfaces)."""
    out = np.empty_like(f)
    _apply(coef, np.ascontiguousarray(f), out)
    return out


@dataclass(frozen=True)
class EvolveReport:
    n_steps: int
    stages: int
    dt: float
    rho: float


def rkg_integrate(
    coef: np.ndarray,
    rho: float,
    values: np.ndarray,
    duration: float,
    n_steps: int,
    label: str = "",
) -> tuple[np.ndarray, EvolveReport]:
    """Integrate f' = L f over ``duration`` in ``n_steps`` equal RKG2 steps.

    ``values`` is (nx, nv, n_surfaces). Raises PdeInstability as soon as any
    value exceeds ten times the initial bound.
    """
    if n_steps < 1:
        raise DomainError(f"need at least one time step, got {n_steps}")
    if not duration > 0:
        raise DomainError(f"duration must be > 0, got {duration}")
    y0 = np.array(values, dtype=float, order="C", copy=True)
    if y0.ndim != 3:
        raise DomainError("values must be shaped (nx, nv, n_surfaces)")
    bound = _max_abs(y0)
    if not math.isfinite(bound):
        raise DomainError("initial surfaces are not finite")
    limit = INSTABILITY_FACTOR * max(bound, 1e-300)
    dt = duration / n_steps
    s = stage_count(dt * rho)
    c = rkg_coefficients(s)
    log.debug("%s RKG2: %d steps of %d stages, dt*rho=%.4g", label, n_steps, s, dt * rho)
    ly0 = np.empty_like(y0)
    bufs = [np.empty_like(y0) for _ in range(3)]
    for step in range(n_steps):
        _apply(coef, y0, ly0)
        y_prev2, y_prev = y0, bufs[0]
        _first_stage(y0, ly0, y_prev, c.mu_tilde[1] * dt)
        free = [bufs[1], bufs[2]]
        for k in range(2, s + 1):
            out = free.pop()
            _stage(coef, y_prev, y_prev2, y0, ly0, out,
                   c.mu[k], c.nu[k], c.mu_tilde[k] * dt, c.gamma_tilde[k] * dt)
            if y_prev2 is not y0:
                free.append(y_prev2)
            y_prev2, y_prev = y_prev, out
        peak = _max_abs(y_prev)
        if not peak <= limit:
            raise PdeInstability(
                f"{label} step {step + 1}/{n_steps}: max |f| = {peak:.4g} exceeds "
                f"{INSTABILITY_FACTOR:g} x initial bound {bound:.4g} (s={s}, dt*rho={dt * rho:.4g})"
            )
        # y_prev becomes the new Y0; recycle the old Y0 buffer
        spare = y0
        y0 = y_prev
        bufs = [b for b in bufs if b is not y0] + [spare]
        bufs = bufs[:3]
    return y0, EvolveReport(n_steps, s, dt, rho)
