"""Seeded round-by-round market simulation.

Each round a customer sees the displayed reviews, forms a quality estimate,
and buys iff their valuation plus the estimate reaches the posted price.
Buyers leave a rating drawn from the current quality. Replications use
independent counter-based streams keyed by (seed, replication), so results
do not depend on how replications are scheduled.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np
import pandas as pd
from scipy.special import betaincinv

from .errors import ConfigInvalid, InvalidParams
from .model import (
    ABSORBING_TOL,
    BetaMean,
    BetaQuantile,
    Instance,
    PricingPolicy,
    StateTable,
    Static,
    Table,
)
from .parallel import ordered_map

logger = logging.getLogger(__name__)

SEED_LIMIT = 2**64


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SimOrdering:
    """Which reviews are displayed: ``newest``, ``random_iid``,
    ``random_finite_pool`` or ``window`` (c of the w most recent)."""

    kind: str
    w: Optional[int] = None

    KINDS = ("newest", "random_iid", "random_finite_pool", "window")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigInvalid("ordering", f"unknown ordering {self.kind!r}")
        if self.kind == "window":
            w = self.w
            if w is None or isinstance(w, bool) or int(w) != w or w < 1:
                raise ConfigInvalid(
                    "ordering.w", f"window size must be a positive integer, got {w}"
                )
            object.__setattr__(self, "w", int(self.w))
        elif self.w is not None:
            raise ConfigInvalid(
                "ordering.w", f"only window orderings take w, got {self.kind}"
            )

    @classmethod
    def window(cls, w: int) -> "SimOrdering":
        return cls("window", w)

    def to_record(self) -> Union[str, dict[str, Any]]:
        if self.kind == "window":
            return {"kind": "window", "w": self.w}
        return self.kind


NEWEST = SimOrdering("newest")
RANDOM_IID = SimOrdering("random_iid")
RANDOM_FINITE_POOL = SimOrdering("random_finite_pool")


@dataclass(frozen=True)
class Baseline:
    kind = "baseline"

    def to_record(self) -> dict[str, Any]:
        return {"kind": self.kind}


@dataclass(frozen=True)
class TimeVaryingPrior:
    """Prior Beta(a + gamma P_t, b + gamma N_t) over the pool tallies."""

    gamma: float

    kind = "time_varying_prior"

    def to_record(self) -> dict[str, Any]:
        return {"kind": self.kind, "gamma": self.gamma}


@dataclass(frozen=True)
class IncreasingQuality:
    """Quality moves linearly from ``mu_lo`` in the first round to ``mu_hi``."""

    mu_lo: float
    mu_hi: float

    kind = "increasing_quality"

    def quality(self, t: int, total: int) -> float:
        if total <= 1:
            return self.mu_lo
        return self.mu_lo + t / (total - 1) * (self.mu_hi - self.mu_lo)

    def to_record(self) -> dict[str, Any]:
        return {"kind": self.kind, "mu_lo": self.mu_lo, "mu_hi": self.mu_hi}


@dataclass(frozen=True)
class MarkovQuality:
    """Quality switches between two levels with probability xi / 2 per round."""

    mu_lo: float
    mu_hi: float
    xi: float

    kind = "markov_quality"

    def to_record(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "mu_lo": self.mu_lo,
            "mu_hi": self.mu_hi,
            "xi": self.xi,
        }


@dataclass(frozen=True)
class CoarseRatings:
    """Reviews reveal the reviewer's full value Theta + X rather than X alone."""

    kind = "coarse_ratings"

    def to_record(self) -> dict[str, Any]:
        return {"kind": self.kind}


Variant = Union[
    Baseline, TimeVaryingPrior, IncreasingQuality, MarkovQuality, CoarseRatings
]

TRAJECTORY_VARIANTS = (TimeVaryingPrior, IncreasingQuality)


@dataclass(frozen=True)
class SimConfig:
    """One simulation run.

    ``burn_in=None`` discards max(10^4, 100 * 2^c) rounds for the stationary
    variants and none for the trajectory variants, which are watched from
    their first round. A time-varying prior with gamma = 0 reproduces the
    baseline only when both runs get the same explicit ``burn_in``, and only
    for orderings other than windows: a baseline window starts with w
    reviews, the trajectory variants with c.
    """

    inst: Instance
    ordering: SimOrdering
    pricing: PricingPolicy
    rounds: int
    replications: int
    seed: int
    variant: Variant = field(default_factory=Baseline)
    burn_in: Optional[int] = None
    record_trajectory: bool = False

    def __post_init__(self):
        validate(self)

    def effective_burn_in(self) -> int:
        if self.burn_in is not None:
            return self.burn_in
        if isinstance(self.variant, TRAJECTORY_VARIANTS):
            return 0
        return max(10_000, 100 * 2**self.inst.c)

    def to_record(self) -> dict[str, Any]:
        return {
            "instance": self.inst.to_record(),
            "ordering": self.ordering.to_record(),
            "pricing": self.pricing.to_record(),
            "rounds": self.rounds,
            "replications": self.replications,
            "seed": self.seed,
            "variant": self.variant.to_record(),
            "burn_in": self.burn_in,
            "record_trajectory": self.record_trajectory,
        }


def _positive_int(name: str, value: Any) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
        raise ConfigInvalid(name, f"must be a positive integer, got {value!r}")


def _check_levels(prefix: str, lo: float, hi: float, strict: bool) -> None:
    ordered = lo < hi if strict else lo <= hi
    if not (0.0 < lo < 1.0 and 0.0 < hi < 1.0 and ordered):
        relation = "<" if strict else "<="
        raise ConfigInvalid(
            f"{prefix}.mu_lo", f"need 0 < mu_lo {relation} mu_hi < 1, got {lo}, {hi}"
        )


def validate(config: SimConfig) -> None:
    """Raise ConfigInvalid naming the first offending field."""
    _positive_int("simulation.rounds", config.rounds)
    _positive_int("simulation.replications", config.replications)
    seed = config.seed
    integral = isinstance(seed, (int, np.integer)) and not isinstance(seed, bool)
    if not integral or not 0 <= seed < SEED_LIMIT:
        raise ConfigInvalid(
            "simulation.seed", f"must be an integer in [0, 2^64), got {seed!r}"
        )
    burn_in = config.burn_in
    if burn_in is not None and (
        isinstance(burn_in, bool) or not isinstance(burn_in, int) or burn_in < 0
    ):
        raise ConfigInvalid(
            "simulation.burn_in", f"must be a non-negative integer, got {burn_in!r}"
        )

    inst, ordering, variant = config.inst, config.ordering, config.variant
    try:
        config.pricing.check(inst.c)
    except InvalidParams as exc:
        raise ConfigInvalid("pricing", str(exc)) from None
    if ordering.kind == "window" and ordering.w < inst.c:
        raise ConfigInvalid(
            "ordering.w", f"window {ordering.w} is smaller than c={inst.c}"
        )
    if isinstance(config.pricing, StateTable) and (
        ordering.kind != "newest" or not isinstance(variant, Baseline)
    ):
        raise ConfigInvalid(
            "pricing", "state tables are simulated under baseline newest only"
        )

    prefix = "simulation.variant"
    if isinstance(variant, TimeVaryingPrior):
        if not (math.isfinite(variant.gamma) and variant.gamma >= 0):
            raise ConfigInvalid(
                f"{prefix}.gamma", f"must be non-negative, got {variant.gamma}"
            )
        beta_prior = isinstance(inst.estimator, (BetaMean, BetaQuantile))
        if variant.gamma > 0 and not beta_prior:
            raise ConfigInvalid(
                "instance.estimator", "time-varying priors need a Beta estimator"
            )
    elif isinstance(variant, IncreasingQuality):
        _check_levels(prefix, variant.mu_lo, variant.mu_hi, strict=False)
    elif isinstance(variant, MarkovQuality):
        _check_levels(prefix, variant.mu_lo, variant.mu_hi, strict=True)
        if not 0.0 < variant.xi <= 1.0:
            raise ConfigInvalid(f"{prefix}.xi", f"must lie in (0, 1], got {variant.xi}")
        if inst.c != 1:
            raise ConfigInvalid("instance.c", "switching quality is simulated with c=1")
        if ordering.kind not in ("newest", "random_iid"):
            raise ConfigInvalid(
                "ordering", "switching quality supports newest and random_iid"
            )
    elif isinstance(variant, CoarseRatings):
        if inst.c != 1:
            raise ConfigInvalid("instance.c", "coarse ratings are simulated with c=1")
        if not isinstance(config.pricing, Static):
            raise ConfigInvalid("pricing", "coarse ratings need a static price")
        if ordering.kind == "random_iid":
            raise ConfigInvalid("ordering", "coarse ratings have no i.i.d. review law")
    elif not isinstance(variant, Baseline):
        raise ConfigInvalid(prefix, f"unknown variant {variant!r}")


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Replication:
    revenue: float
    purchase_rate: float
    belief_error: Optional[float] = None
    revenue_path: Optional[np.ndarray] = None
    rating_path: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class SimResult:
    avg_revenue_per_round: float
    stderr: float
    purchase_rate: float
    rounds: int
    replications: int
    burn_in: int
    revenue_trajectory: Optional[np.ndarray] = None
    avg_displayed_rating_trajectory: Optional[np.ndarray] = None
    belief_error: Optional[float] = None
    belief_error_stderr: Optional[float] = None

    def to_record(self, trajectories: bool = False) -> dict[str, Any]:
        record = {
            k: v
            for k, v in asdict(self).items()
            if k not in ("revenue_trajectory", "avg_displayed_rating_trajectory")
        }
        if trajectories and self.revenue_trajectory is not None:
            record["revenue_trajectory"] = self.revenue_trajectory.tolist()
            record["avg_displayed_rating_trajectory"] = (
                self.avg_displayed_rating_trajectory.tolist()
            )
        return record


def _stderr(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(values.std(ddof=1) / math.sqrt(values.size))


def _aggregate(config: SimConfig, reps: list[_Replication]) -> SimResult:
    revenues = np.array([r.revenue for r in reps])
    beliefs = [r.belief_error for r in reps]
    belief = belief_stderr = None
    if beliefs[0] is not None:
        values = np.array(beliefs, dtype=float)
        belief, belief_stderr = float(values.mean()), _stderr(values)
    revenue_path = rating_path = None
    if config.record_trajectory:
        revenue_path = np.mean([r.revenue_path for r in reps], axis=0)
        rating_path = np.mean([r.rating_path for r in reps], axis=0)
    return SimResult(
        avg_revenue_per_round=float(revenues.mean()),
        stderr=_stderr(revenues),
        purchase_rate=float(np.mean([r.purchase_rate for r in reps])),
        rounds=config.rounds,
        replications=config.replications,
        burn_in=config.effective_burn_in(),
        revenue_trajectory=revenue_path,
        avg_displayed_rating_trajectory=rating_path,
        belief_error=belief,
        belief_error_stderr=belief_stderr,
    )


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------


def replication_rng(seed: int, replication: int) -> np.random.Generator:
    """Philox stream for one replication."""
    sequence = np.random.SeedSequence(seed, spawn_key=(replication,))
    return np.random.Generator(np.random.Philox(sequence))


class _Recorder:
    """Accumulates post-burn-in revenue, purchases and optional paths."""

    def __init__(self, burn_in: int, rounds: int, trajectory: bool):
        self.burn_in = burn_in
        self.rounds = rounds
        self.revenue = 0.0
        self.purchases = 0
        self.revenue_path = [0.0] * rounds if trajectory else None
        self.rating_path = [0.0] * rounds if trajectory else None

    def record(self, t: int, paid: float, bought: bool, rating: float) -> None:
        if t < self.burn_in:
            return
        if bought:
            self.revenue += paid
            self.purchases += 1
        if self.revenue_path is not None:
            i = t - self.burn_in
            self.revenue_path[i] = paid if bought else 0.0
            self.rating_path[i] = rating

    def finish(self, belief_error: Optional[float] = None) -> _Replication:
        paths = (None, None)
        if self.revenue_path is not None:
            paths = (np.array(self.revenue_path), np.array(self.rating_path))
        return _Replication(
            revenue=self.revenue / self.rounds,
            purchase_rate=self.purchases / self.rounds,
            belief_error=belief_error,
            revenue_path=paths[0],
            rating_path=paths[1],
        )


def _count_prices(config: SimConfig) -> Optional[list[float]]:
    if isinstance(config.pricing, StateTable):
        return None
    return config.pricing.count_prices(config.inst.c).tolist()


def _belief_fn(config: SimConfig):
    """Estimate as a function of (n, positives, negatives) in the pool."""
    inst, variant = config.inst, config.variant
    h = inst.h_values().tolist()
    c = inst.c
    if not isinstance(variant, TimeVaryingPrior) or variant.gamma == 0:
        return lambda n, pos, neg: h[n]
    gamma = variant.gamma
    est = inst.estimator
    if isinstance(est, BetaMean):
        a, b = est.a, est.b
        return lambda n, pos, neg: (a + gamma * pos + n) / (
            a + b + gamma * (pos + neg) + c
        )
    a, b, phi = est.a, est.b, est.phi
    return lambda n, pos, neg: float(
        betaincinv(a + gamma * pos + n, b + gamma * neg + c - n, phi)
    )


def _generic_replication(config: SimConfig, replication: int) -> _Replication:
    """Binary ratings under baseline, time-varying prior or increasing quality."""
    rng = replication_rng(config.seed, replication)
    inst, ordering, variant = config.inst, config.ordering, config.variant
    c = inst.c
    burn_in = config.effective_burn_in()
    total = burn_in + config.rounds

    if isinstance(variant, IncreasingQuality):
        initial_mu = variant.mu_lo
        quality = [variant.quality(t, total) for t in range(total)]
    else:
        initial_mu = inst.mu
        quality = None
    windowed = isinstance(variant, Baseline) and ordering.kind == "window"
    n_initial = ordering.w if windowed else c

    reviews = (rng.random(n_initial) < initial_mu).astype(int).tolist()
    theta = np.asarray(inst.dist.sample(rng, total), dtype=float).tolist()
    review_u = rng.random(total).tolist()
    select_u = rng.random((total, c)).tolist()

    prices = _count_prices(config)
    state_prices = list(config.pricing.prices) if prices is None else None
    belief = _belief_fn(config)
    recorder = _Recorder(burn_in, config.rounds, config.record_trajectory)

    kind = ordering.kind
    newest_sum = sum(reviews[-c:])
    positives = sum(reviews)
    negatives = len(reviews) - positives
    perm: list[int] = []
    mu_t = inst.mu

    for t in range(total):
        if quality is not None:
            mu_t = quality[t]

        if kind == "newest":
            n = newest_sum
        elif kind == "random_iid":
            n = 0
            for u in select_u[t]:
                if u < mu_t:
                    n += 1
        else:
            pooled = kind == "random_finite_pool"
            size = len(reviews) if pooled else min(ordering.w, len(reviews))
            while len(perm) < size:
                perm.append(len(perm))
            row = select_u[t]
            n = 0
            # partial Fisher-Yates: perm[:c] is a uniform c-subset of range(size)
            for j in range(c):
                k = j + int(row[j] * (size - j))
                perm[j], perm[k] = perm[k], perm[j]
                n += reviews[perm[j]] if pooled else reviews[-1 - perm[j]]

        if prices is not None:
            price = prices[n]
        else:
            index = 0
            for i in range(c):
                index = (index << 1) | reviews[-1 - i]
            price = state_prices[index]

        bought = theta[t] + belief(n, positives, negatives) >= price
        if bought:
            rating = 1 if review_u[t] < mu_t else 0
            reviews.append(rating)
            newest_sum += rating - reviews[-1 - c]
            positives += rating
            negatives += 1 - rating
        recorder.record(t, price, bought, n / c)

    return recorder.finish()


def _summarize(
    config: SimConfig,
    paid: np.ndarray,
    bought: np.ndarray,
    shown: np.ndarray,
    belief_error: Optional[float] = None,
) -> _Replication:
    """Replication totals from per-round arrays that include the burn-in."""
    burn_in = config.effective_burn_in()
    revenue = np.where(bought[burn_in:], paid[burn_in:], 0.0)
    paths = (None, None)
    if config.record_trajectory:
        paths = (revenue, np.asarray(shown[burn_in:], dtype=float))
    return _Replication(
        revenue=float(revenue.sum()) / config.rounds,
        purchase_rate=int(bought[burn_in:].sum()) / config.rounds,
        belief_error=belief_error,
        revenue_path=paths[0],
        rating_path=paths[1],
    )


def _stationary_reviews(config: SimConfig) -> bool:
    """Whether ratings are i.i.d. Bern(mu) and the estimate depends on n only."""
    variant = config.variant
    if isinstance(variant, TimeVaryingPrior):
        return variant.gamma == 0
    return isinstance(variant, Baseline)


def _newest_replication(config: SimConfig, replication: int) -> _Replication:
    """Newest First with stationary ratings, advanced one purchase at a time.

    Ratings do not depend on when purchases happen, so the whole rating
    sequence is drawn up front. After k purchases the display is fixed and
    every round buys with the same probability, so the wait for purchase
    k + 1 is geometric.
    """
    rng = replication_rng(config.seed, replication)
    inst = config.inst
    c = inst.c
    burn_in = config.effective_burn_in()
    total = burn_in + config.rounds

    ratings = (rng.random(total + c) < inst.mu).astype(np.int64)
    edges = np.concatenate(([0], np.cumsum(ratings)))
    counts = edges[c : c + total] - edges[:total]
    if isinstance(config.pricing, StateTable):
        windows = np.lib.stride_tricks.sliding_window_view(ratings[: total + c - 1], c)
        index = windows @ (1 << np.arange(c))
        prices = np.asarray(config.pricing.prices, dtype=float)[index]
    else:
        prices = config.pricing.count_prices(c)[counts]
    q = np.asarray(inst.dist.survival(prices - inst.h_values()[counts]), dtype=float)

    live = q > ABSORBING_TOL
    waits = rng.geometric(np.where(live, q, 1.0))
    waits = np.where(live, np.minimum(waits, total + 1), total + 1)
    # times[k]: round of purchase k + 1, made while display k is shown
    times = np.cumsum(waits) - 1
    sold = (times >= burn_in) & (times < total)

    paths = (None, None)
    if config.record_trajectory:
        revenue_path = np.zeros(config.rounds)
        revenue_path[times[sold] - burn_in] = prices[sold]
        state = np.searchsorted(times, np.arange(burn_in, total))
        paths = (revenue_path, counts[state] / c)
    return _Replication(
        revenue=float(prices[sold].sum()) / config.rounds,
        purchase_rate=int(sold.sum()) / config.rounds,
        revenue_path=paths[0],
        rating_path=paths[1],
    )


def _iid_replication(config: SimConfig, replication: int) -> _Replication:
    """Random selection from an endless i.i.d. pool; rounds are independent."""
    rng = replication_rng(config.seed, replication)
    inst = config.inst
    total = config.effective_burn_in() + config.rounds
    theta = np.asarray(inst.dist.sample(rng, total), dtype=float)
    counts = rng.binomial(inst.c, inst.mu, total)
    paid = config.pricing.count_prices(inst.c)[counts]
    bought = theta + inst.h_values()[counts] >= paid
    return _summarize(config, paid, bought, counts / inst.c)


def _markov_replication(config: SimConfig, replication: int) -> _Replication:
    """Single displayed review with quality switching between two levels."""
    rng = replication_rng(config.seed, replication)
    inst, variant = config.inst, config.variant
    burn_in = config.effective_burn_in()
    total = burn_in + config.rounds
    levels = np.array([variant.mu_lo, variant.mu_hi])
    mix = 0.5 * (variant.mu_lo + variant.mu_hi)
    switch = 0.5 * variant.xi

    high = int(rng.random() < 0.5)
    newest = int(rng.random() < levels[high])
    theta = np.asarray(inst.dist.sample(rng, total), dtype=float)
    review_u = rng.random(total)
    select_u = rng.random(total)
    switch_u = rng.random(total)

    # quality in force during each round; switches take effect the round after
    flips = np.concatenate(([0], np.cumsum(switch_u[:-1] < switch)))
    mu_t = levels[(high + flips) % 2]
    rating = (review_u < mu_t).astype(np.int64)
    h = inst.h_values()
    prices = config.pricing.count_prices(1)
    buys = theta[:, None] + h[None, :] >= prices[None, :]

    if config.ordering.kind == "random_iid":
        shown = (select_u < mix).astype(np.int64)
    else:
        # each round either keeps the shown review or replaces it with that
        # round's rating whichever review was shown before
        resets = (
            (buys[:, 0] & buys[:, 1])
            | (buys[:, 0] & (rating == 1))
            | (buys[:, 1] & (rating == 0))
        )
        last = np.maximum.accumulate(np.where(resets, np.arange(total), -1))
        previous = np.concatenate(([-1], last[:-1]))
        shown = np.where(previous >= 0, rating[np.maximum(previous, 0)], newest)

    bought = buys[np.arange(total), shown]
    squared_error = ((h[shown] - mu_t)[burn_in:] ** 2).sum()
    return _summarize(
        config,
        prices[shown],
        bought,
        shown,
        belief_error=float(squared_error) / config.rounds,
    )


def _coarse_replication(config: SimConfig, replication: int) -> _Replication:
    """Real-valued reviews R = Theta + X; buy iff Theta_t + R > p."""
    rng = replication_rng(config.seed, replication)
    inst, ordering = config.inst, config.ordering
    burn_in = config.effective_burn_in()
    total = burn_in + config.rounds
    mu = inst.mu
    price = config.pricing.p

    first_theta = float(inst.dist.sample(rng))
    reviews = [first_theta + float(rng.random() < mu)]
    theta = np.asarray(inst.dist.sample(rng, total), dtype=float).tolist()
    review_u = rng.random(total).tolist()
    select_u = rng.random(total).tolist()

    recorder = _Recorder(burn_in, config.rounds, config.record_trajectory)
    kind = ordering.kind
    for t in range(total):
        if kind == "newest":
            shown = reviews[-1]
        elif kind == "random_finite_pool":
            shown = reviews[int(select_u[t] * len(reviews))]
        else:
            size = min(ordering.w, len(reviews))
            shown = reviews[-1 - int(select_u[t] * size)]
        bought = theta[t] + shown > price
        if bought:
            reviews.append(theta[t] + float(review_u[t] < mu))
        recorder.record(t, price, bought, shown)

    return recorder.finish()


def _run_replication(args: tuple[SimConfig, int]) -> _Replication:
    config, replication = args
    if isinstance(config.variant, MarkovQuality):
        result = _markov_replication(config, replication)
    elif isinstance(config.variant, CoarseRatings):
        result = _coarse_replication(config, replication)
    elif _stationary_reviews(config) and config.ordering.kind == "newest":
        result = _newest_replication(config, replication)
    elif _stationary_reviews(config) and config.ordering.kind == "random_iid":
        result = _iid_replication(config, replication)
    else:
        result = _generic_replication(config, replication)
    logger.debug("Replication %d: mean revenue %.12g", replication, result.revenue)
    return result


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------


def run(config: SimConfig) -> SimResult:
    validate(config)
    tasks = [(config, r) for r in range(config.replications)]
    reps = ordered_map(_run_replication, tasks)
    result = _aggregate(config, reps)
    logger.info(
        "Simulated %s/%s: %d rounds x %d replications, revenue %.6g +/- %.2g",
        config.variant.kind,
        config.ordering.kind,
        config.rounds,
        config.replications,
        result.avg_revenue_per_round,
        result.stderr,
    )
    return result


def _run_expecting(config: SimConfig, variant_type: type) -> SimResult:
    if not isinstance(config.variant, variant_type):
        raise ConfigInvalid(
            "simulation.variant",
            f"expected {variant_type.kind}, got {config.variant.kind}",
        )
    return run(config)


def run_variant_time_varying_prior(config: SimConfig) -> SimResult:
    return _run_expecting(config, TimeVaryingPrior)


def run_variant_increasing_quality(config: SimConfig) -> SimResult:
    return _run_expecting(config, IncreasingQuality)


def run_variant_coarse_ratings(config: SimConfig) -> SimResult:
    return _run_expecting(config, CoarseRatings)


def run_variant_markov_quality(config: SimConfig) -> SimResult:
    return _run_expecting(config, MarkovQuality)


def observed_quality_baseline(inst: Instance) -> Instance:
    """Same market, but the customer reads only the binary rating of a review."""
    return inst.with_(estimator=Table((0.0, 1.0)))


def write_trajectory_csv(result: SimResult, path: str | Path) -> Path:
    if result.revenue_trajectory is None:
        raise InvalidParams("simulation result carries no trajectory")
    path = Path(path)
    frame = pd.DataFrame(
        {
            "round": np.arange(1, result.revenue_trajectory.size + 1),
            "mean_revenue": result.revenue_trajectory,
            "mean_displayed_rating": result.avg_displayed_rating_trajectory,
        }
    )
    frame.to_csv(path, index=False, float_format="%.12g", lineterminator="\n")
    logger.info("Wrote %d trajectory rows to %s", len(frame), path)
    return path
