"""Numerical helpers shared by the analytic modules.

Binomial and hypergeometric weights are evaluated in log space through
``scipy.special.gammaln`` so review counts and windows in the thousands stay
finite. One-dimensional maximisation is a coarse grid followed by a
golden-section refinement of the best bracket.
"""

from __future__ import annotations

import logging
import math
from typing import Callable

import numpy as np
from scipy.special import gammaln

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2

GRID_POINTS = 10_000


def log_comb(n, k):
    """log C(n, k); -inf where k lies outside 0..n."""
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    feasible = (k >= 0) & (k <= n)
    safe_k = np.where(feasible, k, 0.0)
    out = gammaln(n + 1) - gammaln(safe_k + 1) - gammaln(n - safe_k + 1)
    return np.where(feasible, out, -np.inf)


def binomial_weights(n: int, p: float) -> np.ndarray:
    """P[N = k] for N ~ Binomial(n, p), k = 0..n."""
    k = np.arange(n + 1, dtype=float)
    if p <= 0.0 or p >= 1.0:
        weights = np.zeros(n + 1)
        weights[0 if p <= 0.0 else n] = 1.0
        return weights
    log_pmf = log_comb(n, k) + k * math.log(p) + (n - k) * math.log1p(-p)
    return np.exp(log_pmf)


def hypergeometric_weights(total: int, successes: int, draws: int) -> np.ndarray:
    """P[X = n], n = 0..draws, for ``draws`` picks without replacement.

    The urn holds ``total`` items of which ``successes`` are marked.
    """
    n = np.arange(draws + 1, dtype=float)
    log_pmf = (
        log_comb(successes, n)
        + log_comb(total - successes, draws - n)
        - log_comb(total, draws)
    )
    return np.exp(log_pmf)


def golden_section_max(
    f: Callable[[float], float], a: float, b: float, tol: float = 1e-12
) -> tuple[float, float]:
    """Maximise a unimodal ``f`` on [a, b] to an interval of width ``tol``."""
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, f(x)

    steps = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)
    for _ in range(steps - 1):
        if yc >= yd:
            b = d
            d = c
            yd = yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a = c
            c = d
            yc = yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)

    if yc >= yd:
        return c, yc
    return d, yd


def maximize_on_interval(
    objective: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    points: int = GRID_POINTS,
) -> tuple[float, float]:
    """Global-then-local maximisation of a vectorised objective on [lo, hi].

    The grid guards against non-concave objectives; golden-section only
    polishes the winning bracket. Ties resolve to the lowest argument.
    """
    if hi <= lo:
        value = float(objective(np.array([lo]))[0])
        return lo, value

    grid = np.linspace(lo, hi, points)
    values = objective(grid)
    best = int(np.argmax(values))
    left = grid[max(best - 1, 0)]
    right = grid[min(best + 1, points - 1)]
    logger.debug(
        "Grid maximum %.12g at %.12g; refining on [%.12g, %.12g]",
        values[best],
        grid[best],
        left,
        right,
    )

    def scalar(x: float) -> float:
        return float(objective(np.array([x]))[0])

    x, fx = golden_section_max(scalar, left, right, tol=1e-12 * max(1.0, abs(hi)))
    if fx > values[best]:
        return float(x), float(fx)
    return float(grid[best]), float(values[best])
