"""Natural bicubic spline on a rectangular grid.

The tensor-product spline is assembled from one-dimensional natural cubic
splines (``scipy.interpolate.CubicSpline``): a spline in x through every row of
node values, then a spline in y through each of the resulting x-coefficients.
Since the 1-D fit is linear in the data this yields the full per-cell table
``c[p, q, i, j]`` of ``s(x, y) = sum c[p, q] (x - x_i)^(3-p) (y - y_j)^(3-q)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from ..errors import DomainError


@dataclass(frozen=True)
class Spline2D:
    x_knots: np.ndarray
    y_knots: np.ndarray
    coefficients: np.ndarray  # (4, 4, nx - 1, ny - 1)

    def __call__(self, x, y):
        return spline2d_eval(self, x, y)


def _check_knots(k, name):
    k = np.asarray(k, dtype=float)
    if k.ndim != 1 or k.size < 2 or not np.all(np.diff(k) > 0):
        raise DomainError(f"{name} must be a strictly ascending vector of at least two knots")
    return k


def spline2d_fit(x_knots, y_knots, values) -> Spline2D:
    x = _check_knots(x_knots, "x_knots")
    y = _check_knots(y_knots, "y_knots")
    values = np.asarray(values, dtype=float)
    if values.shape != (x.size, y.size):
        raise DomainError(f"values shape {values.shape} does not match knots ({x.size}, {y.size})")
    cx = CubicSpline(x, values, axis=0, bc_type="natural").c  # (4, nx-1, ny)
    cxy = CubicSpline(y, cx, axis=2, bc_type="natural").c  # (4, ny-1, 4, nx-1)
    return Spline2D(x, y, np.ascontiguousarray(cxy.transpose(2, 0, 3, 1)))


def spline2d_eval(s: Spline2D, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    tol = 1e-12
    xs, ys = s.x_knots, s.y_knots
    if np.any(x < xs[0] - tol * abs(xs[0])) or np.any(x > xs[-1] + tol * abs(xs[-1])):
        raise DomainError("x lies outside the spline's knot range")
    if np.any(y < ys[0] - tol * abs(ys[0])) or np.any(y > ys[-1] + tol * abs(ys[-1])):
        raise DomainError("y lies outside the spline's knot range")
    i = np.clip(np.searchsorted(xs, x, side="right") - 1, 0, xs.size - 2)
    j = np.clip(np.searchsorted(ys, y, side="right") - 1, 0, ys.size - 2)
    dx = x - xs[i]
    dy = y - ys[j]
    c = s.coefficients
    px = np.stack([dx**3, dx**2, dx, np.ones_like(dx)])
    py = np.stack([dy**3, dy**2, dy, np.ones_like(dy)])
    out = np.einsum("p...,q...,pq...->...", px, py, c[:, :, i, j])
    return float(out) if out.ndim == 0 else out
