"""Closed-form steady-state quantities for static and dynamic prices.

All revenues are long-run averages per round. Count-based formulas weight
review counts by Binomial(c, mu); the Newest-First ones divide by purchase
probabilities, so prices that never sell in some state are rejected.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .errors import (
    AbsorbingPrice,
    AbsorbingState,
    InvalidParams,
    NotCalibrated,
    OracleFailure,
)
from .markov import NONSTATIONARY_STATES, StationaryDist, state_purchase_probs
from .model import (
    ABSORBING_TOL,
    Instance,
    Ordering,
    PricingPolicy,
    StateTable,
    all_states,
    purchase_probs,
)
from .numeric import binomial_weights, hypergeometric_weights

logger = logging.getLogger(__name__)

# Largest c for which the CoNF double sum is formed explicitly.
DOUBLE_SUM_MAX_C = 400

CALIBRATION_TOL = 1e-12


@dataclass(frozen=True)
class ConfReport:
    """Revenues under both orderings and the Cost of Newest First."""

    rev_random: float
    rev_newest: float
    chi: float
    beta: float
    non_degenerate: bool

    def to_record(self) -> dict:
        return asdict(self)


def _non_absorbing_probs(inst: Instance, price: float) -> np.ndarray:
    q = purchase_probs(inst, price)
    if q.min() <= ABSORBING_TOL:
        stuck = [int(n) for n in np.flatnonzero(q <= ABSORBING_TOL)]
        raise AbsorbingPrice(f"price {price} never sells with {stuck} positive reviews")
    return q


def rev_random_static(inst: Instance, price: float) -> float:
    return float(price * (inst.count_weights() @ purchase_probs(inst, price)))


def rev_newest_static(inst: Instance, price: float) -> float:
    q = _non_absorbing_probs(inst, price)
    return float(price / (inst.count_weights() @ (1.0 / q)))


def conf_static(inst: Instance, price: float) -> ConfReport:
    """CoNF of a static price from the double sum over review counts.

    The double sum is checked against the ratio of the two revenues.
    """
    q = _non_absorbing_probs(inst, price)
    w = inst.count_weights()
    if inst.c <= DOUBLE_SUM_MAX_C:
        chi = float(np.sum(np.outer(w * q, w / q)))
    else:
        chi = float((w @ q) * (w @ (1.0 / q)))

    rev_random = rev_random_static(inst, price)
    rev_newest = rev_newest_static(inst, price)
    if rev_newest != 0:
        ratio = rev_random / rev_newest
        if abs(ratio - chi) > 1e-10 * max(1.0, abs(chi)):
            raise OracleFailure(
                f"CoNF double sum {chi!r} disagrees with revenue ratio {ratio!r}"
            )
    return ConfReport(
        rev_random=rev_random,
        rev_newest=rev_newest,
        chi=chi,
        beta=float(q[-1] / q[0]),
        non_degenerate=bool(q[0] < q[-1]),
    )


def conf_lower_bound_static(inst: Instance, price: float) -> float:
    """mu^c (1 - mu)^c beta(p), a lower bound on the static CoNF."""
    q = _non_absorbing_probs(inst, price)
    c, mu = inst.c, inst.mu
    return float(math.exp(c * (math.log(mu) + math.log1p(-mu))) * q[-1] / q[0])


def stationary_newest_counts(inst: Instance, price: float) -> np.ndarray:
    """Long-run law of the number of positive reviews shown under Newest First."""
    q = _non_absorbing_probs(inst, price)
    weights = inst.count_weights() / q
    return weights / weights.sum()


def stationary_random_counts(inst: Instance) -> np.ndarray:
    return np.array(inst.count_weights())


def _state_weights(inst: Instance) -> tuple[np.ndarray, list]:
    """Probability of each rating vector under i.i.d. Bern(mu) ratings."""
    states = all_states(inst.c)
    counts = np.array([s.n_pos for s in states], dtype=float)
    log_w = counts * math.log(inst.mu) + (inst.c - counts) * math.log1p(-inst.mu)
    return np.exp(log_w), states


def _state_probs_or_raise(inst: Instance, policy: PricingPolicy) -> np.ndarray:
    q = state_purchase_probs(inst, policy)
    stuck = np.flatnonzero(q <= ABSORBING_TOL)
    if stuck.size:
        states = all_states(inst.c)
        raise AbsorbingState(
            f"policy never sells in {stuck.size} review states",
            [states[i].label for i in stuck],
        )
    return q


def stationary_newest_states(inst: Instance, policy: PricingPolicy) -> StationaryDist:
    """Per-state Newest-First law: proportional to mu^N (1-mu)^(c-N) / q(z)."""
    q = _state_probs_or_raise(inst, policy)
    weights, states = _state_weights(inst)
    weights = weights / q
    return StationaryDist(tuple(s.label for s in states), weights / weights.sum())


def expected_positive_reviews(
    inst: Instance, price: float, ordering: Ordering
) -> float:
    if Ordering(ordering) is Ordering.RANDOM:
        _non_absorbing_probs(inst, price)
        return inst.c * inst.mu
    return float(stationary_newest_counts(inst, price) @ np.arange(inst.c + 1))


def rev_newest_dynamic(inst: Instance, policy: PricingPolicy) -> float:
    """Newest-First revenue of an arbitrary state-dependent policy.

    E[rho(Y)] / E[1 / q(Y)] with Y a vector of c i.i.d. Bern(mu) ratings.
    """
    policy.check(inst.c)
    if isinstance(policy, StateTable):
        q = _state_probs_or_raise(inst, policy)
        weights, _ = _state_weights(inst)
        prices = np.asarray(policy.prices, dtype=float)
    else:
        prices = policy.count_prices(inst.c)
        q = purchase_probs(inst, prices)
        stuck = np.flatnonzero(q <= ABSORBING_TOL)
        if stuck.size:
            raise AbsorbingState(
                f"policy never sells with {stuck.tolist()} positive reviews",
                [int(n) for n in stuck],
            )
        weights = inst.count_weights()
    return float((weights @ prices) / (weights @ (1.0 / q)))


def rev_random_dynamic(inst: Instance, policy: PricingPolicy) -> float:
    policy.check(inst.c)
    if isinstance(policy, StateTable):
        q = state_purchase_probs(inst, policy)
        weights, _ = _state_weights(inst)
        prices = np.asarray(policy.prices, dtype=float)
    else:
        prices = policy.count_prices(inst.c)
        q = purchase_probs(inst, prices)
        weights = inst.count_weights()
    return float(weights @ (prices * q))


def rev_known_quality(inst: Instance, price: float) -> float:
    """Revenue when customers know mu exactly."""
    return float(price * inst.dist.survival(price - inst.mu))


def known_quality_ratio(inst: Instance, price: float) -> float:
    known = rev_known_quality(inst, price)
    if known <= 0:
        raise AbsorbingPrice(f"price {price} never sells under known quality")
    return rev_newest_static(inst, price) / known


def window_inverse_rates(inst: Instance, w: int, price: float) -> np.ndarray:
    """Inverse purchase rate for each count k = 0..w of positives in the window."""
    if w < inst.c:
        raise InvalidParams(f"window w={w} must be at least c={inst.c}")
    q = _non_absorbing_probs(inst, price)
    rates = np.array([hypergeometric_weights(w, k, inst.c) @ q for k in range(w + 1)])
    return 1.0 / rates


def window_revenue(inst: Instance, w: int, price: float) -> float:
    """Revenue when c of the w most recent reviews are shown uniformly at random."""
    iota = window_inverse_rates(inst, w, price)
    inverse_kappa = binomial_weights(w, inst.mu) @ iota
    return float(price / inverse_kappa)


# ---------------------------------------------------------------------------
# Two-level switching quality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NonstationarySteadyState:
    """Steady state of the switching-quality model under a static price.

    ``pi`` follows the state order ``0L, 1L, 0H, 1H`` (newest rating, quality).
    """

    pi: tuple[float, float, float, float]
    rev_newest: float
    rev_random: float
    belief_error_newest: Optional[float] = None
    belief_error_random: Optional[float] = None

    def __getitem__(self, label: str) -> float:
        return self.pi[NONSTATIONARY_STATES.index(label)]

    @property
    def pi_negative(self) -> float:
        """Long-run share of rounds whose newest review is negative."""
        return self["0L"] + self["0H"]

    def to_record(self) -> dict:
        record = asdict(self)
        record["pi"] = dict(zip(NONSTATIONARY_STATES, self.pi))
        return record


def ns_steady(
    mu_L: float,
    mu_H: float,
    xi: float,
    price: float,
    base: Instance,
    belief_error: bool = True,
) -> NonstationarySteadyState:
    """Closed-form steady state of the (newest rating, quality) chain.

    With ``belief_error`` set, the estimator must be calibrated, i.e.
    h(0) = mu_L and h(1) = mu_H.
    """
    if base.c != 1:
        raise InvalidParams(f"switching-quality model needs c=1, got c={base.c}")
    if not 0.0 < mu_L < mu_H < 1.0:
        raise InvalidParams(f"need 0 < mu_L < mu_H < 1, got mu_L={mu_L}, mu_H={mu_H}")
    if not 0.0 < xi <= 1.0:
        raise InvalidParams(f"xi must lie in (0, 1], got {xi}")
    q0, q1 = (float(v) for v in purchase_probs(base, price))
    if q0 <= ABSORBING_TOL:
        raise InvalidParams(f"price {price} never sells after a negative review")
    if not q1 > q0:
        raise InvalidParams(f"price {price} is degenerate (q0={q0}, q1={q1})")

    a_h = 1.0 - ((1.0 - mu_H) * q1 + mu_H * q0)
    a_l = 1.0 - ((1.0 - mu_L) * q1 + mu_L * q0)
    denom = (2.0 - (2.0 - xi) * a_h) * (2.0 - (2.0 - xi) * a_l) - xi**2 * a_h * a_l
    low, high = 1.0 - mu_L, 1.0 - mu_H
    pi_0h = q1 * (2.0 * high * a_l * (xi - 1.0) + low * xi + high * (2.0 - xi)) / denom
    pi_0l = q1 * (2.0 * low * a_h * (xi - 1.0) + high * xi + low * (2.0 - xi)) / denom
    pi = (pi_0l, 0.5 - pi_0l, pi_0h, 0.5 - pi_0h)

    negative = pi_0l + pi_0h
    rev_newest = price * (q0 * negative + q1 * (1.0 - negative))
    mix = 0.5 * (mu_L + mu_H)
    rev_random = price * (q0 * (1.0 - mix) + q1 * mix)

    be_newest = be_random = None
    if belief_error:
        h0, h1 = base.h_values()
        if abs(h0 - mu_L) > CALIBRATION_TOL or abs(h1 - mu_H) > CALIBRATION_TOL:
            raise NotCalibrated(
                f"belief error needs h(0)=mu_L and h(1)=mu_H, got h=({h0}, {h1})"
            )
        gap = mu_H - mu_L
        be_random = 0.5 * gap**2
        be_newest = 2.0 * q1 * q0 * gap**3 * (xi - 1.0) / denom + be_random

    logger.debug(
        "ns_steady(xi=%.6g, price=%.6g): pi=%s rev_newest=%.12g rev_random=%.12g",
        xi,
        price,
        pi,
        rev_newest,
        rev_random,
    )
    return NonstationarySteadyState(pi, rev_newest, rev_random, be_newest, be_random)
