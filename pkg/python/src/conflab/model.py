"""Market instances: estimators, review states and pricing policies.

An :class:`Instance` bundles the true quality ``mu``, the valuation law F,
the attention span ``c`` and the estimator ``h`` that maps a count of
positive displayed reviews to the customer's quality estimate.
"""

from __future__ import annotations

import enum
import itertools
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Any, Mapping, Sequence

import numpy as np
from scipy.special import betaincinv

from .distributions import ValuationDistribution
from .errors import IndexOutOfRange, InvalidInstance, InvalidParams
from .numeric import binomial_weights

logger = logging.getLogger(__name__)

# Purchase probabilities below this are treated as zero.
ABSORBING_TOL = 1e-15

# Largest attention span for which {0,1}^c is enumerated explicitly.
MAX_ENUMERATED_C = 20


class Ordering(str, enum.Enum):
    NEWEST = "newest"
    RANDOM = "random"


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------


class Estimator(ABC):
    kind: str = ""

    @abstractmethod
    def estimate(self, n: int, c: int) -> float:
        """Quality estimate after seeing ``n`` positive reviews out of ``c``."""

    @abstractmethod
    def to_record(self) -> dict[str, Any]: ...

    def values(self, c: int) -> np.ndarray:
        return np.array([self.estimate(n, c) for n in range(c + 1)], dtype=float)

    def with_prior(self, a: float, b: float) -> "Estimator":
        raise InvalidParams(f"{self.kind} estimator has no Beta prior to replace")


def _check_count(n: int, c: int) -> None:
    if not 0 <= n <= c:
        raise IndexOutOfRange(f"review count {n} outside 0..{c}")


def _check_beta(kind: str, a: float, b: float) -> None:
    if not (math.isfinite(a) and math.isfinite(b) and a > 0 and b > 0):
        raise InvalidInstance(
            f"{kind}: prior parameters must be positive, got a={a}, b={b}"
        )


@dataclass(frozen=True)
class BetaMean(Estimator):
    """Posterior mean of a Beta(a, b) prior updated with the displayed reviews."""

    a: float = 1.0
    b: float = 1.0

    kind = "beta_mean"

    def __post_init__(self):
        _check_beta(self.kind, self.a, self.b)

    def estimate(self, n: int, c: int) -> float:
        _check_count(n, c)
        return (self.a + n) / (self.a + self.b + c)

    def values(self, c: int) -> np.ndarray:
        return (self.a + np.arange(c + 1, dtype=float)) / (self.a + self.b + c)

    def with_prior(self, a: float, b: float) -> "BetaMean":
        return BetaMean(a, b)

    def to_record(self) -> dict[str, Any]:
        return {"kind": self.kind, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class BetaQuantile(Estimator):
    """``phi``-quantile of the Beta posterior, for cautious customers."""

    a: float = 1.0
    b: float = 1.0
    phi: float = 0.5

    kind = "beta_quantile"

    def __post_init__(self):
        _check_beta(self.kind, self.a, self.b)
        if not 0.0 < self.phi < 1.0:
            raise InvalidInstance(
                f"beta_quantile: phi must lie in (0, 1), got {self.phi}"
            )

    def estimate(self, n: int, c: int) -> float:
        _check_count(n, c)
        return float(betaincinv(self.a + n, self.b + c - n, self.phi))

    def values(self, c: int) -> np.ndarray:
        n = np.arange(c + 1, dtype=float)
        return betaincinv(self.a + n, self.b + c - n, self.phi)

    def with_prior(self, a: float, b: float) -> "BetaQuantile":
        return BetaQuantile(a, b, self.phi)

    def to_record(self) -> dict[str, Any]:
        return {"kind": self.kind, "a": self.a, "b": self.b, "phi": self.phi}


@dataclass(frozen=True)
class Table(Estimator):
    """Explicit estimate per count; ``entries[n]`` is h(n)."""

    entries: tuple[float, ...]

    kind = "table"

    def __post_init__(self):
        values = tuple(float(v) for v in self.entries)
        object.__setattr__(self, "entries", values)
        if len(values) < 2:
            raise InvalidInstance("table: needs at least two values (c >= 1)")
        if not all(math.isfinite(v) for v in values):
            raise InvalidInstance(f"table: values must be finite, got {values}")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise InvalidInstance(
                f"table: values must be strictly increasing, got {values}"
            )

    @property
    def c(self) -> int:
        return len(self.entries) - 1

    def estimate(self, n: int, c: int) -> float:
        if c != self.c:
            raise InvalidInstance(f"table has {len(self.entries)} values but c={c}")
        _check_count(n, c)
        return self.entries[n]

    def values(self, c: int) -> np.ndarray:
        if c != self.c:
            raise InvalidInstance(f"table has {len(self.entries)} values but c={c}")
        return np.array(self.entries, dtype=float)

    def to_record(self) -> dict[str, Any]:
        return {"kind": self.kind, "values": list(self.entries)}


def estimate(estimator: Estimator, n: int, c: int) -> float:
    return estimator.estimate(n, c)


# ---------------------------------------------------------------------------
# Instance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Instance:
    """One market configuration (mu, F, c, h)."""

    mu: float
    dist: ValuationDistribution
    c: int
    estimator: Estimator

    def __post_init__(self):
        if not (math.isfinite(self.mu) and 0.0 < self.mu < 1.0):
            raise InvalidInstance(f"mu must lie in (0, 1), got {self.mu}")
        if isinstance(self.c, bool) or int(self.c) != self.c or self.c < 1:
            raise InvalidInstance(f"c must be a positive integer, got {self.c}")
        object.__setattr__(self, "c", int(self.c))
        if self.dist.p_nonnegative() <= 0:
            raise InvalidInstance(
                f"valuation law {self.dist.to_record()} puts no mass on [0, inf)"
            )
        h = self.h_values()
        if not np.all(np.isfinite(h)):
            raise InvalidInstance(f"estimator produced non-finite values {h}")
        if np.any(np.diff(h) <= 0):
            raise InvalidInstance(
                f"estimator values must be strictly increasing, got {h}"
            )

    @cached_property
    def _h(self) -> np.ndarray:
        h = np.asarray(self.estimator.values(self.c), dtype=float)
        h.setflags(write=False)
        return h

    @cached_property
    def _weights(self) -> np.ndarray:
        w = binomial_weights(self.c, self.mu)
        w.setflags(write=False)
        return w

    def h_values(self) -> np.ndarray:
        """h(0), ..., h(c)."""
        return self._h

    def count_weights(self) -> np.ndarray:
        """Binomial(c, mu) probabilities over positive-review counts."""
        return self._weights

    def with_(self, **changes: Any) -> "Instance":
        return replace(self, **changes)

    def to_record(self) -> dict[str, Any]:
        return {
            "mu": self.mu,
            "c": self.c,
            "dist": self.dist.to_record(),
            "estimator": self.estimator.to_record(),
        }


# ---------------------------------------------------------------------------
# Review states
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReviewState:
    """Displayed ratings; ``bits[0]`` is the most recent."""

    bits: tuple[int, ...]

    @property
    def n_pos(self) -> int:
        return sum(self.bits)

    @property
    def index(self) -> int:
        """Position of the state in :func:`all_states` order."""
        out = 0
        for bit in self.bits:
            out = (out << 1) | bit
        return out

    @property
    def label(self) -> str:
        return "".join(str(b) for b in self.bits)

    def push(self, rating: int) -> "ReviewState":
        """State after a new review: it enters first and the oldest drops out."""
        return ReviewState((rating,) + self.bits[:-1])

    @classmethod
    def from_label(cls, label: str) -> "ReviewState":
        if not label or set(label) - {"0", "1"}:
            raise InvalidParams(
                f"review state label must be a bitstring, got {label!r}"
            )
        return cls(tuple(int(ch) for ch in label))


def all_states(c: int) -> list[ReviewState]:
    """{0,1}^c in index order."""
    if c > MAX_ENUMERATED_C:
        raise InvalidParams(
            f"state enumeration is limited to c <= {MAX_ENUMERATED_C}, got {c}"
        )
    return [ReviewState(bits) for bits in itertools.product((0, 1), repeat=c)]



# ---------------------------------------------------------------------------
# Pricing policies
# ---------------------------------------------------------------------------


class PricingPolicy(ABC):
    kind: str = ""

    @abstractmethod
    def price(self, state: ReviewState) -> float: ...

    @abstractmethod
    def check(self, c: int) -> None:
        """Raise InvalidParams unless the policy covers every state of {0,1}^c."""

    @abstractmethod
    def to_record(self) -> dict[str, Any]: ...

    def count_prices(self, c: int) -> np.ndarray:
        raise InvalidParams(f"{self.kind} policy does not depend on counts only")


def _check_prices(kind: str, prices: Sequence[float]) -> tuple[float, ...]:
    prices = tuple(float(p) for p in prices)
    if not all(math.isfinite(p) for p in prices):
        raise InvalidInstance(f"{kind}: prices must be finite, got {prices}")
    return prices


@dataclass(frozen=True)
class Static(PricingPolicy):
    p: float

    kind = "static"

    def __post_init__(self):
        _check_prices(self.kind, [self.p])

    def price(self, state: ReviewState) -> float:
        return self.p

    def check(self, c: int) -> None:
        return None

    def count_prices(self, c: int) -> np.ndarray:
        return np.full(c + 1, self.p, dtype=float)

    def to_record(self) -> dict[str, Any]:
        return {"kind": self.kind, "price": self.p}


@dataclass(frozen=True)
class CountTable(PricingPolicy):
    """Price indexed by the number of positive displayed reviews."""

    prices: tuple[float, ...]

    kind = "count_table"

    def __post_init__(self):
        object.__setattr__(self, "prices", _check_prices(self.kind, self.prices))

    def price(self, state: ReviewState) -> float:
        return self.prices[state.n_pos]

    def check(self, c: int) -> None:
        if len(self.prices) != c + 1:
            raise InvalidParams(
                f"count_table has {len(self.prices)} prices, expected c+1={c + 1}"
            )

    def count_prices(self, c: int) -> np.ndarray:
        self.check(c)
        return np.array(self.prices, dtype=float)

    def to_record(self) -> dict[str, Any]:
        return {"kind": self.kind, "prices": list(self.prices)}


@dataclass(frozen=True)
class StateTable(PricingPolicy):
    """Price per review state, stored in :func:`all_states` order."""

    prices: tuple[float, ...]

    kind = "state_table"

    def __post_init__(self):
        prices = _check_prices(self.kind, self.prices)
        n = len(prices)
        if n < 2 or n & (n - 1):
            raise InvalidInstance(f"state_table needs 2^c prices, got {n}")
        object.__setattr__(self, "prices", prices)

    @property
    def c(self) -> int:
        return len(self.prices).bit_length() - 1

    @classmethod
    def from_mapping(cls, prices: Mapping[str | ReviewState, float]) -> "StateTable":
        keyed = {
            (k if isinstance(k, ReviewState) else ReviewState.from_label(k)): float(v)
            for k, v in prices.items()
        }
        lengths = {len(s.bits) for s in keyed}
        if len(lengths) != 1:
            raise InvalidParams("state_table labels must all have the same length")
        c = lengths.pop()
        missing = [s.label for s in all_states(c) if s not in keyed]
        if missing:
            raise InvalidParams(f"state_table misses states {missing}")
        return cls(tuple(keyed[s] for s in all_states(c)))

    def price(self, state: ReviewState) -> float:
        return self.prices[state.index]

    def check(self, c: int) -> None:
        if self.c != c:
            raise InvalidParams(f"state_table covers c={self.c}, expected c={c}")

    def to_record(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "prices": {s.label: p for s, p in zip(all_states(self.c), self.prices)},
        }


# ---------------------------------------------------------------------------
# Purchase probabilities and price assumptions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PriceAssumptionReport:
    non_absorbing: bool
    non_degenerate: bool

    @property
    def ok(self) -> bool:
        return self.non_absorbing and self.non_degenerate


def purchase_prob(inst: Instance, n: int, price: float) -> float:
    """P[Theta + h(n) >= price]."""
    _check_count(n, inst.c)
    return float(inst.dist.survival(price - inst.h_values()[n]))


def purchase_probs(inst: Instance, prices) -> np.ndarray:
    """Purchase probability per count; ``prices`` is a scalar or one per count."""
    prices = np.broadcast_to(np.asarray(prices, dtype=float), (inst.c + 1,))
    return np.asarray(inst.dist.survival(prices - inst.h_values()), dtype=float)


def validate_price(inst: Instance, price: float) -> PriceAssumptionReport:
    q = purchase_probs(inst, price)
    return PriceAssumptionReport(
        non_absorbing=bool(q.min() > ABSORBING_TOL),
        non_degenerate=bool(q[0] < q[-1]),
    )


def hbar(inst: Instance) -> float:
    """Expected estimate under Binomial(c, mu) reviews."""
    return float(inst.count_weights() @ inst.h_values())
