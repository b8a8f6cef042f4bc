"""Independent oracles used by the test suite.

Everything here is deliberately brute-force and shares no code with the
package's own implementations: ranks by position counting, correlation from
the raw Pearson formula, the textbook tie-free rank-correlation shortcut,
and dual objectives by exhaustive grid enumeration.
"""
from __future__ import annotations

import math

import numpy as np


def brute_force_average_ranks(values) -> list[float]:
    """Rank each value as (#smaller) + (mean position among its equals)."""
    ranks = []
    for v in values:
        less = sum(1 for w in values if w < v)
        equal = sum(1 for w in values if w == v)
        ranks.append(less + (equal + 1) / 2.0)
    return ranks


def pearson(a, b) -> float:
    n = len(a)
    ma = sum(a) / n
    mb = sum(b) / n
    cov = sum((x - ma) * (y - mb) for x, y in zip(a, b))
    va = sum((x - ma) ** 2 for x in a)
    vb = sum((y - mb) ** 2 for y in b)
    return cov / math.sqrt(va * vb)


def spearman_tie_free_closed_form(a, b) -> float:
    """1 - 6*sum(d^2)/(n(n^2-1)); valid only when each vector is tie-free."""
    n = len(a)
    rank_a = {i: r for r, i in enumerate(sorted(range(n), key=lambda i: a[i]), start=1)}
    rank_b = {i: r for r, i in enumerate(sorted(range(n), key=lambda i: b[i]), start=1)}
    d2 = sum((rank_a[i] - rank_b[i]) ** 2 for i in range(n))
    return 1.0 - 6.0 * d2 / (n * (n * n - 1))


def spearman_brute_force(a, b) -> float:
    return pearson(brute_force_average_ranks(a), brute_force_average_ranks(b))


def svr_dual_objective(K: np.ndarray, y: np.ndarray, epsilon: float, beta: np.ndarray) -> float:
    """Dual objective (maximization form) at net coefficients beta."""
    return float(-0.5 * beta @ K @ beta - epsilon * np.sum(np.abs(beta)) + y @ beta)


def svr_dual_grid_best(K: np.ndarray, y: np.ndarray, C: float, epsilon: float) -> float:
    """Best dual objective over the lattice beta_i in {-C, -C+0.01C, ..., C}.

    The equality constraint sum(beta) = 0 is enforced by solving for the last
    coefficient; lattice sums stay on the lattice, so no feasible point is
    missed. Supports n <= 4.
    """
    n = len(y)
    if n == 1:
        return 0.0  # sum constraint pins the single coefficient at zero
    step = 0.01 * C
    grid = np.arange(-100, 101, dtype=np.float64) * step

    if n == 2:
        b1 = grid
        b2 = -b1  # always within the box
        W = (
            -0.5 * (K[0, 0] * b1**2 + 2 * K[0, 1] * b1 * b2 + K[1, 1] * b2**2)
            - epsilon * (np.abs(b1) + np.abs(b2))
            + y[0] * b1
            + y[1] * b2
        )
        return float(W.max())

    if n == 3:
        b1, b2 = np.meshgrid(grid, grid, indexing="ij")
        b3 = -(b1 + b2)
        ok = np.abs(b3) <= C + 1e-12
        W = (
            -0.5
            * (
                K[0, 0] * b1**2
                + K[1, 1] * b2**2
                + K[2, 2] * b3**2
                + 2 * (K[0, 1] * b1 * b2 + K[0, 2] * b1 * b3 + K[1, 2] * b2 * b3)
            )
            - epsilon * (np.abs(b1) + np.abs(b2) + np.abs(b3))
            + y[0] * b1
            + y[1] * b2
            + y[2] * b3
        )
        return float(W[ok].max())

    if n == 4:
        b2, b3 = np.meshgrid(grid, grid, indexing="ij")
        s23 = b2 + b3
        # terms not involving b1 or b4, computed once
        inner = (
            -0.5 * (K[1, 1] * b2**2 + K[2, 2] * b3**2 + 2 * K[1, 2] * b2 * b3)
            - epsilon * (np.abs(b2) + np.abs(b3))
            + y[1] * b2
            + y[2] * b3
        )
        best = -np.inf
        for b1 in grid:
            b4 = -b1 - s23
            ok = np.abs(b4) <= C + 1e-12
            if not ok.any():
                continue
            W = (
                inner
                - 0.5 * (K[0, 0] * b1**2 + K[3, 3] * b4**2)
                - (K[0, 1] * b2 + K[0, 2] * b3 + K[0, 3] * b4) * b1
                - (K[1, 3] * b2 + K[2, 3] * b3) * b4
                - epsilon * (abs(b1) + np.abs(b4))
                + y[0] * b1
                + y[3] * b4
            )
            best = max(best, float(W[ok].max()))
        return best

    raise ValueError("grid oracle supports n <= 4 only")
