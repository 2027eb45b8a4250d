"""Least-squares fit of put-call parity, G_i = beta1 K_i + beta2."""

from __future__ import annotations

import numpy as np

from ..errors import DomainError


class ParityRegression:
    """Normal equations H^T H beta = H^T G with H = [K, 1], factorized once.

    The same strikes are reused at every PDE node, so the 2x2 system is
    inverted here and each solve is a single product with the stored
    (2, n) solution operator.
    """

    def __init__(self, strikes):
        k = np.asarray(strikes, dtype=float)
        if k.ndim != 1 or k.size < 2:
            raise DomainError("parity regression needs at least two strikes")
        h = np.column_stack([k, np.ones_like(k)])
        gram = h.T @ h
        det = gram[0, 0] * gram[1, 1] - gram[0, 1] * gram[1, 0]
        # scale-free singularity check: det = n * sum((K - mean K)^2)
        if not det > 1e-14 * gram[0, 0] * gram[1, 1]:
            raise DomainError("parity regression is singular: strikes are not distinct")
        self.strikes = k
        self.design = h
        self.gram = gram
        self._solver = np.linalg.solve(gram, h.T)

    def solve(self, g):
        """Return (beta1, beta2); ``g`` may carry extra leading axes (..., n)."""
        g = np.asarray(g, dtype=float)
        beta = g @ self._solver.T
        return beta[..., 0], beta[..., 1]


def solve_parity_regression(strikes, g):
    return ParityRegression(strikes).solve(g)
