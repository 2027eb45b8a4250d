"""Central finite-difference discretization of the Heston operator.

    L f = v x^2/2 f_xx + rho sigma x v f_xv + sigma^2 v/2 f_vv
          + (r - q) x f_x + kappa (theta - v) f_v - r_C f

The operator is stored per node as a nine-point stencil, entry 3a + b
multiplying ``f[i + a - 1, j + b - 1]``, plus a tenth entry multiplying
``f[i, j + 2]`` (used on the v = 0 row only). Boundary rows are folded into
the same layout so that out-of-range neighbours always carry a zero weight:

* x = 0: every x-term vanishes, leaving the 1-D variance equation;
* x = x_max and v = v_max: zero second derivative in the outward direction,
  imposed through the linear ghost value f[n+1] = 2 f[n] - f[n-1];
* v = 0: the degenerate first-order equation, with kappa theta f_v taken
  one-sided into the domain (first or second order).
"""

from __future__ import annotations

import numpy as np

from ..errors import DomainError
from ..model import HestonParams, MarketConvention
from .grid import PdeGrid


STENCIL_SIZE = 10


def _fd_weights(nodes: np.ndarray):
    """Three-point first and second derivative weights on possibly uneven nodes.

    Returns (first, second), each (n, 3) for the (previous, own, next) node.
    Spacing beyond either end mirrors the adjacent interval (ghost node).
    """
    h = np.diff(nodes)
    hm = np.concatenate([[h[0]], h])
    hp = np.concatenate([h, [h[-1]]])
    s = hm + hp
    first = np.column_stack([-hp / (hm * s), (hp - hm) / (hm * hp), hm / (hp * s)])
    second = np.column_stack([2.0 / (hm * s), -2.0 / (hm * hp), 2.0 / (hp * s)])
    return first, second


def heston_stencil(
    grid: PdeGrid, params: HestonParams, conv: MarketConvention, v0_order: int = 2
) -> np.ndarray:
    x, v = grid.x, grid.v
    nx, nv = grid.shape
    dx1, dx2 = _fd_weights(x)
    dv1, dv2 = _fd_weights(v)
    xx, vv = x[:, None, None], v[None, :, None]
    # (nx, nv, 3) weights along x (a axis) and along v (b axis)
    along_x = 0.5 * vv * xx * xx * dx2[:, None, :] + (conv.r - conv.q) * xx * dx1[:, None, :]
    along_v = 0.5 * params.sigma**2 * vv * dv2[None, :, :] + params.kappa * (params.theta - vv) * dv1[None, :, :]
    along_v = np.broadcast_to(along_v, (nx, nv, 3))

    coef = np.zeros((nx, nv, 3, 3))
    coef[:, :, :, 1] += along_x
    coef[:, :, 1, :] += along_v
    coef[:, :, 1, 1] -= conv.r_c
    cross = params.rho * params.sigma * xx[..., None] * vv[..., None]
    coef += cross * dx1[:, None, :, None] * dv1[None, :, None, :]

    # v = 0: only the x-drift and the inflowing kappa theta f_v survive
    kt = params.kappa * params.theta
    h1, h2 = v[1] - v[0], v[2] - v[1]
    far = np.zeros(nx)
    coef[:, 0, :, 0] = 0.0
    coef[:, 0, 1, 1] = along_x[:, 0, 1] - conv.r_c
    coef[:, 0, 0, 2] = coef[:, 0, 2, 2] = 0.0
    if v0_order == 1:
        coef[:, 0, 1, 2] = kt / h1
        coef[:, 0, 1, 1] -= kt / h1
    elif v0_order == 2:
        coef[:, 0, 1, 1] -= kt * (2.0 * h1 + h2) / (h1 * (h1 + h2))
        coef[:, 0, 1, 2] = kt * (h1 + h2) / (h1 * h2)
        far[:] = -kt * h1 / (h2 * (h1 + h2))
    else:
        raise DomainError(f"v0_order must be 1 or 2, got {v0_order}")

    # linear ghost values beyond x_max and v_max
    ghost = coef[-1, :, 2, :].copy()
    coef[-1, :, 1, :] += 2.0 * ghost
    coef[-1, :, 0, :] -= ghost
    coef[-1, :, 2, :] = 0.0
    ghost = coef[:, -1, :, 2].copy()
    coef[:, -1, :, 1] += 2.0 * ghost
    coef[:, -1, :, 0] -= ghost
    coef[:, -1, :, 2] = 0.0

    # x = 0 carries no x-terms already (a = bx = e = 0); make it exact
    coef[0, :, 0, :] = 0.0
    out = np.zeros((nx, nv, STENCIL_SIZE))
    out[:, :, :9] = coef.reshape(nx, nv, 9)
    out[:, 0, 9] = far
    return out


def spectral_radius_bound(coef: np.ndarray) -> float:
    """Gershgorin bound on the spectral radius of the discrete operator."""
    return float(np.max(np.sum(np.abs(coef), axis=-1)))


def apply_stencil_reference(coef: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Plain numpy application of the stencil, for testing the compiled kernel."""
    nx, nv = f.shape[:2]
    pad = np.zeros((nx + 2, nv + 2) + f.shape[2:])
    pad[1:-1, 1:-1] = f
    out = np.zeros_like(f)
    c = coef[:, :, :9].reshape(nx, nv, 3, 3)
    tail = (1,) * (f.ndim - 2)
    for a in range(3):
        for b in range(3):
            out += c[:, :, a, b].reshape((nx, nv) + tail) * pad[a:a + nx, b:b + nv]
    if nv > 2:
        out[:, 0] += coef[:, 0, 9].reshape((nx,) + tail) * f[:, 2]
    return out
