"""Optimal static and dynamic pricing under both review orderings.

Dynamic policies are searched over count tables only: the estimator depends
on the number of positive reviews, so the optimal prices do too.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import analytics
from .analytics import ConfReport
from .distributions import Bernoulli, Uniform, myerson
from .errors import BoundViolation, InvalidParams, NotWellBehaved
from .model import (
    ABSORBING_TOL,
    CountTable,
    Instance,
    Ordering,
    PricingPolicy,
    Static,
    hbar,
    purchase_probs,
)
from .numeric import maximize_on_interval
from .parallel import ordered_map

logger = logging.getLogger(__name__)

BOUND_TOL = 1e-9

# Cap on grid cells evaluated at once by the static objective.
_CHUNK_CELLS = 2_000_000


@dataclass(frozen=True)
class PricingDiagnostics:
    offset: Optional[float] = None
    per_count_prices: Optional[tuple[float, ...]] = None
    expected_price_ratio: Optional[float] = None
    max_demand_ratio: Optional[float] = None


@dataclass(frozen=True)
class OptimizedPricing:
    """Best policy found within a class, and its revenue under ``ordering``."""

    policy: PricingPolicy
    revenue: float
    ordering: Ordering
    diagnostics: PricingDiagnostics = field(default_factory=PricingDiagnostics)

    def to_record(self) -> dict:
        return {
            "ordering": self.ordering.value,
            "policy": self.policy.to_record(),
            "revenue": self.revenue,
            "diagnostics": {
                k: (list(v) if isinstance(v, tuple) else v)
                for k, v in asdict(self.diagnostics).items()
                if v is not None
            },
        }


# ---------------------------------------------------------------------------
# Static prices
# ---------------------------------------------------------------------------


def _static_revenues(
    inst: Instance, ordering: Ordering, prices: np.ndarray
) -> np.ndarray:
    """Static revenue at every price of ``prices`` (absorbing prices earn 0)."""
    h = inst.h_values()
    w = inst.count_weights()
    out = np.empty(prices.shape[0])
    step = max(1, _CHUNK_CELLS // (inst.c + 1))
    for start in range(0, prices.shape[0], step):
        p = prices[start : start + step]
        q = np.asarray(inst.dist.survival(p[:, None] - h[None, :]), dtype=float)
        if ordering is Ordering.RANDOM:
            out[start : start + step] = p * (q @ w)
        else:
            absorbing = (q <= ABSORBING_TOL).any(axis=1)
            inverse = 1.0 / np.maximum(q, ABSORBING_TOL)
            out[start : start + step] = np.where(absorbing, 0.0, p / (inverse @ w))
    return out


def _search_upper(inst: Instance, count: int = -1) -> float:
    """Highest price at which a display with ``count`` positives still sells."""
    return inst.dist.upper_quantile() + float(inst.h_values()[count])


def optimal_static(inst: Instance, ordering: Ordering) -> OptimizedPricing:
    """Best single posted price for ``ordering``.

    Grid over [0, sup F + h(c)] refined by golden-section; Bernoulli laws
    also try every atom-plus-estimate price, where the revenue jumps. Newest
    First stops at sup F + h(0): above it an all-negative display never
    sells again.
    """
    ordering = Ordering(ordering)
    upper = _search_upper(inst, 0 if ordering is Ordering.NEWEST else -1)
    price, revenue = maximize_on_interval(
        lambda p: _static_revenues(inst, ordering, p), 0.0, upper
    )
    if isinstance(inst.dist, Bernoulli):
        candidates = (a + h for a in inst.dist.atoms() for h in inst.h_values())
        atoms = sorted({p for p in candidates if p > 0})
        values = _static_revenues(inst, ordering, np.array(atoms))
        best = int(np.argmax(values))
        if values[best] > revenue or (values[best] == revenue and atoms[best] < price):
            price, revenue = atoms[best], float(values[best])

    if ordering is Ordering.RANDOM:
        revenue = analytics.rev_random_static(inst, price)
    elif revenue > 0:
        revenue = analytics.rev_newest_static(inst, price)
    logger.info(
        "Optimal static price (%s): p=%.12g revenue=%.12g",
        ordering.value,
        price,
        revenue,
    )
    return OptimizedPricing(Static(price), revenue, ordering)


# ---------------------------------------------------------------------------
# Dynamic prices
# ---------------------------------------------------------------------------


def optimal_dynamic_random(inst: Instance) -> OptimizedPricing:
    """Myerson price for each count of positive reviews."""
    results = [myerson(inst.dist, float(h)) for h in inst.h_values()]
    prices = tuple(r.price for r in results)
    revenue = float(inst.count_weights() @ np.array([r.revenue for r in results]))
    logger.info("Optimal dynamic policy (random): revenue=%.12g", revenue)
    return OptimizedPricing(
        CountTable(prices),
        revenue,
        Ordering.RANDOM,
        PricingDiagnostics(per_count_prices=prices),
    )


def optimal_dynamic_newest(inst: Instance) -> OptimizedPricing:
    """Review-offsetting policy h(n) + a* with a* = p*(Theta + hbar) - hbar."""
    h_bar = hbar(inst)
    best = myerson(inst.dist, h_bar)
    offset = best.price - h_bar
    prices = tuple(float(h) + offset for h in inst.h_values())
    logger.info(
        "Optimal dynamic policy (newest): offset=%.12g revenue=%.12g",
        offset,
        best.revenue,
    )
    return OptimizedPricing(
        CountTable(prices),
        best.revenue,
        Ordering.NEWEST,
        PricingDiagnostics(offset=offset, per_count_prices=prices),
    )


def optimal_known_quality(inst: Instance) -> OptimizedPricing:
    """Best static price when customers know the true quality."""
    best = myerson(inst.dist, inst.mu)
    return OptimizedPricing(Static(best.price), best.revenue, Ordering.RANDOM)


# ---------------------------------------------------------------------------
# Bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DynamicBounds:
    lower: float
    upper: float
    refined: float

    def to_record(self) -> dict:
        return asdict(self)


def dynamic_bounds(inst: Instance) -> DynamicBounds:
    """Bounds on the dynamic CoNF; ``refined`` uses u = h(c) as the estimate cap."""
    p0 = inst.dist.p_nonnegative()
    u = float(inst.h_values()[-1])
    return DynamicBounds(
        lower=1.0,
        upper=2.0 / p0,
        refined=2.0 * float(inst.dist.survival(-u)) / p0,
    )


def _bounded_nonnegative_top(inst: Instance) -> float:
    lo, hi = inst.dist.support()
    if lo < 0 or not math.isfinite(hi):
        raise InvalidParams(
            "bound needs a valuation law on [0, theta_bar], "
            f"got {inst.dist.to_record()}"
        )
    return hi


def static_bound(inst: Instance) -> float:
    """mu^c h(c) / (h(0) + theta_bar), a lower bound on the static-class CoNF."""
    top = _bounded_nonnegative_top(inst)
    h = inst.h_values()
    return float(inst.mu**inst.c * h[-1] / (h[0] + top))


@dataclass(frozen=True)
class GainBound:
    bound: float
    measured: float

    def to_record(self) -> dict:
        return asdict(self)


def dynamic_to_static_gain_bound(inst: Instance) -> GainBound:
    """Gain of dynamic over static pricing under Newest First, with its lower bound."""
    top = _bounded_nonnegative_top(inst)
    h = inst.h_values()
    bound = float(inst.mu**inst.c * h[-1] / (2.0 * (h[0] + top)))
    static = optimal_static(inst, Ordering.NEWEST).revenue
    measured = optimal_dynamic_newest(inst).revenue / static
    if measured < bound - BOUND_TOL:
        logger.warning("Dynamic/static gain %.12g below bound %.12g", measured, bound)
        raise BoundViolation(f"dynamic/static gain {measured} below bound {bound}")
    return GainBound(bound, measured)


def conf_class(inst: Instance, cls: str) -> ConfReport:
    """CoNF of the static or dynamic pricing class.

    ``beta`` carries an upper bound on ``chi``: the static beta of the
    Random-optimal price for the static class, 2 / P[Theta >= 0] for the
    dynamic class.
    """
    if cls == "static":
        random = optimal_static(inst, Ordering.RANDOM)
        newest = optimal_static(inst, Ordering.NEWEST)
        at_newest = analytics.rev_random_static(inst, newest.policy.p)
        if at_newest > random.revenue:
            random = OptimizedPricing(newest.policy, at_newest, Ordering.RANDOM)
        q = purchase_probs(inst, random.policy.p)
        beta = float(q[-1] / q[0]) if q[0] > ABSORBING_TOL else math.inf
        lower = 1.0
        upper = math.inf
    elif cls == "dynamic":
        random = optimal_dynamic_random(inst)
        newest = optimal_dynamic_newest(inst)
        bounds = dynamic_bounds(inst)
        beta = bounds.upper
        lower = bounds.lower
        upper = min(bounds.upper, bounds.refined)
    else:
        raise InvalidParams(f"pricing class must be 'static' or 'dynamic', got {cls!r}")

    chi = random.revenue / newest.revenue
    if not lower - BOUND_TOL <= chi <= upper + BOUND_TOL:
        logger.warning("%s CoNF %.12g outside [%.12g, %.12g]", cls, chi, lower, upper)
        raise BoundViolation(f"{cls} CoNF {chi} outside [{lower}, {upper}]")
    return ConfReport(
        rev_random=random.revenue,
        rev_newest=newest.revenue,
        chi=chi,
        beta=beta,
        non_degenerate=bool(chi > 1.0 + BOUND_TOL),
    )


# ---------------------------------------------------------------------------
# Price comparisons
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PriceComparison:
    n: int
    estimate: float
    newest: float
    random: float
    sign: int

    def to_record(self) -> dict:
        return asdict(self)


def compare_dynamic_prices(inst: Instance) -> list[PriceComparison]:
    """Newest-optimal minus Random-optimal price at each review count.

    Newest First charges more when h(n) exceeds hbar and less when it falls
    short. Only uniform valuations are known to have unique optimal prices.
    """
    if not isinstance(inst.dist, Uniform):
        raise NotWellBehaved(
            "price comparison is only established for uniform laws, "
            f"got {inst.dist.kind}"
        )
    h_bar = hbar(inst)
    newest = optimal_dynamic_newest(inst).policy.prices
    random = optimal_dynamic_random(inst).policy.prices
    rows = []
    for n, h in enumerate(inst.h_values()):
        diff = newest[n] - random[n]
        sign = 0 if abs(diff) <= BOUND_TOL else (1 if diff > 0 else -1)
        expected = 0 if abs(h - h_bar) <= BOUND_TOL else (1 if h > h_bar else -1)
        if expected * diff < -BOUND_TOL or (expected == 0 and sign != 0):
            logger.warning("Price ordering fails at n=%d: diff=%.12g", n, diff)
            raise BoundViolation(
                f"newest price {newest[n]} vs random {random[n]} at n={n} "
                f"contradicts h(n)={h} against hbar={h_bar}"
            )
        rows.append(PriceComparison(n, float(h), newest[n], random[n], sign))
    return rows


@dataclass(frozen=True)
class PriceDemandDiagnostics:
    expected_price_ratio: float
    max_demand_ratio: float
    demand_ratios: tuple[float, ...]

    def to_record(self) -> dict:
        record = asdict(self)
        record["demand_ratios"] = list(self.demand_ratios)
        return record


def price_demand_diagnostics(inst: Instance) -> PriceDemandDiagnostics:
    """Compare Random-optimal prices with offset prices anchored at hbar.

    The offset price for count n is hbar + max(p*(Theta + h(n)) - h(n), 0).
    The expected price ratio is at most 2 and each demand ratio at most
    1 / P[Theta >= 0].
    """
    h = inst.h_values()
    w = inst.count_weights()
    h_bar = hbar(inst)
    optimal = np.array([myerson(inst.dist, float(v)).price for v in h])
    markup = np.maximum(optimal - h, 0.0)
    offset_prices = h_bar + markup
    price_ratio = float(w @ (optimal / offset_prices))
    demand = np.asarray(inst.dist.survival(optimal - h), dtype=float) / np.asarray(
        inst.dist.survival(markup), dtype=float
    )
    max_demand = float(demand.max())

    demand_cap = 1.0 / inst.dist.p_nonnegative()
    if price_ratio > 2.0 + BOUND_TOL or max_demand > demand_cap + BOUND_TOL:
        logger.warning(
            "Price/demand ratios %.12g / %.12g exceed bounds 2 / %.12g",
            price_ratio,
            max_demand,
            demand_cap,
        )
        raise BoundViolation(
            f"price ratio {price_ratio} or demand ratio {max_demand} exceeds its bound"
        )
    ratios = tuple(float(d) for d in demand)
    return PriceDemandDiagnostics(price_ratio, max_demand, ratios)


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------


def _brute_force_slice(args) -> tuple[float, tuple[int, ...]]:
    """Best count table whose first price is ``grid[first]``."""
    ordering, weights, q_grid, grid, first = args
    c = len(weights) - 1
    shape = [len(grid)] * c
    q_first = q_grid[0, first]
    if ordering is Ordering.NEWEST:
        numerator = weights[0] * grid[first]
    else:
        numerator = weights[0] * grid[first] * q_first
    denominator = weights[0] / q_first if q_first > ABSORBING_TOL else math.inf
    for n in range(1, c + 1):
        axis_shape = [1] * c
        axis_shape[n - 1] = len(grid)
        prices = grid.reshape(axis_shape)
        q = q_grid[n].reshape(axis_shape)
        if ordering is Ordering.NEWEST:
            numerator = numerator + weights[n] * prices
            safe = 1.0 / np.maximum(q, ABSORBING_TOL)
            inverse = np.where(q > ABSORBING_TOL, safe, math.inf)
            denominator = denominator + weights[n] * inverse
        else:
            numerator = numerator + weights[n] * prices * q
    if ordering is Ordering.NEWEST:
        revenue = np.broadcast_to(numerator / denominator, shape)
    else:
        revenue = np.broadcast_to(numerator, shape)
    best = int(np.argmax(revenue))
    rest = np.unravel_index(best, shape)
    return float(revenue.reshape(-1)[best]), (first,) + tuple(int(i) for i in rest)


def brute_force_count_table(
    inst: Instance,
    ordering: Ordering,
    step: float = 0.005,
    upper: Optional[float] = None,
) -> OptimizedPricing:
    """Exhaustive grid search over count tables, for c <= 2."""
    ordering = Ordering(ordering)
    if inst.c > 2:
        raise InvalidParams(
            f"brute-force count tables are limited to c <= 2, got {inst.c}"
        )
    if upper is None:
        upper = _search_upper(inst)
    grid = np.arange(0.0, upper + 0.5 * step, step)
    h = inst.h_values()
    q_grid = np.asarray(inst.dist.survival(grid[None, :] - h[:, None]), dtype=float)
    weights = np.array(inst.count_weights())

    tasks = [(ordering, weights, q_grid, grid, i) for i in range(len(grid))]
    results = ordered_map(_brute_force_slice, tasks)
    revenue, index = results[0]
    for candidate, candidate_index in results[1:]:
        if candidate > revenue:
            revenue, index = candidate, candidate_index
    prices = tuple(float(grid[i]) for i in index)
    logger.info(
        "Brute force (%s, %d grid points per count): best revenue %.12g at %s",
        ordering.value,
        len(grid),
        revenue,
        prices,
    )
    return OptimizedPricing(CountTable(prices), revenue, ordering)
