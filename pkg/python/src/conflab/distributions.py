"""Idiosyncratic valuation laws F and the single-customer revenue optimum.

Every kind exposes the survival function ``P[Theta >= x]``, its support,
seeded sampling and a tagged-record form for configuration files.
:func:`myerson` returns the revenue-maximising posted price for a customer
whose valuation is ``Theta + shift``.
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.stats import norm

from .errors import InvalidInstance, NoPositiveRevenue
from .numeric import maximize_on_interval

logger = logging.getLogger(__name__)

# Unbounded supports are cut where the survival drops below this mass.
TAIL_MASS = 1e-9


def _scalar_or_array(values: np.ndarray) -> Any:
    if values.ndim == 0:
        return float(values)
    return values


class ValuationDistribution(ABC):
    """Base class for every valuation law."""

    kind: str = ""

    @abstractmethod
    def survival(self, x):
        """P[Theta >= x]; accepts scalars or arrays."""

    @abstractmethod
    def support(self) -> tuple[float, float]:
        """Tight support interval, with infinite ends where unbounded."""

    @abstractmethod
    def sample(self, rng: np.random.Generator, size=None):
        """Draw from the law with the caller's generator."""

    @abstractmethod
    def upper_quantile(self, tail: float = TAIL_MASS) -> float:
        """Smallest finite point whose survival is at most ``tail``."""

    @abstractmethod
    def to_record(self) -> dict[str, Any]:
        """Tagged record for configuration files."""

    def p_nonnegative(self) -> float:
        return float(self.survival(0.0))

    def is_bounded(self) -> bool:
        lo, hi = self.support()
        return math.isfinite(lo) and math.isfinite(hi)


def _require_finite(kind: str, **values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise InvalidInstance(f"{kind}: {name} must be finite, got {value}")


@dataclass(frozen=True)
class Uniform(ValuationDistribution):
    lo: float = 0.0
    hi: float = 1.0

    kind = "uniform"

    def __post_init__(self):
        _require_finite(self.kind, lo=self.lo, hi=self.hi)
        if not self.lo < self.hi:
            raise InvalidInstance(
                f"uniform: lo must be below hi, got lo={self.lo}, hi={self.hi}"
            )

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(np.clip((self.hi - x) / (self.hi - self.lo), 0.0, 1.0))

    def support(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.uniform(self.lo, self.hi, size)

    def upper_quantile(self, tail: float = TAIL_MASS) -> float:
        return self.hi

    def to_record(self) -> dict[str, Any]:
        return {"kind": self.kind, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class Exponential(ValuationDistribution):
    rate: float = 1.0

    kind = "exponential"

    def __post_init__(self):
        _require_finite(self.kind, rate=self.rate)
        if self.rate <= 0:
            raise InvalidInstance(
                f"exponential: rate must be positive, got {self.rate}"
            )

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(np.exp(-self.rate * np.maximum(x, 0.0)))

    def support(self) -> tuple[float, float]:
        return (0.0, math.inf)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.exponential(1.0 / self.rate, size)

    def upper_quantile(self, tail: float = TAIL_MASS) -> float:
        return -math.log(tail) / self.rate

    def to_record(self) -> dict[str, Any]:
        return {"kind": self.kind, "rate": self.rate}


@dataclass(frozen=True)
class Normal(ValuationDistribution):
    mean: float = 0.0
    sd: float = 1.0

    kind = "normal"

    def __post_init__(self):
        _require_finite(self.kind, mean=self.mean, sd=self.sd)
        if self.sd <= 0:
            raise InvalidInstance(f"normal: sd must be positive, got {self.sd}")

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        return _scalar_or_array(norm.sf(x, loc=self.mean, scale=self.sd))

    def support(self) -> tuple[float, float]:
        return (-math.inf, math.inf)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.normal(self.mean, self.sd, size)

    def upper_quantile(self, tail: float = TAIL_MASS) -> float:
        return float(norm.isf(tail, loc=self.mean, scale=self.sd))

    def to_record(self) -> dict[str, Any]:
        return {"kind": self.kind, "mean": self.mean, "sd": self.sd}


@dataclass(frozen=True)
class Bernoulli(ValuationDistribution):
    """Two-point law: ``on_value`` with probability ``success_prob``."""

    success_prob: float = 0.5
    on_value: float = 1.0
    off_value: float = 0.0

    kind = "bernoulli"

    def __post_init__(self):
        _require_finite(
            self.kind,
            success_prob=self.success_prob,
            on_value=self.on_value,
            off_value=self.off_value,
        )
        if not 0.0 <= self.success_prob <= 1.0:
            raise InvalidInstance(
                f"bernoulli: success_prob must lie in [0, 1], got {self.success_prob}"
            )

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        q = self.success_prob
        out = q * (self.on_value >= x) + (1.0 - q) * (self.off_value >= x)
        return _scalar_or_array(np.asarray(out, dtype=float))

    def support(self) -> tuple[float, float]:
        atoms = self.atoms()
        return (min(atoms), max(atoms))

    def atoms(self) -> list[float]:
        atoms = []
        if self.success_prob > 0:
            atoms.append(self.on_value)
        if self.success_prob < 1:
            atoms.append(self.off_value)
        return atoms

    def sample(self, rng: np.random.Generator, size=None):
        hits = rng.random(size) < self.success_prob
        if size is None:
            return self.on_value if hits else self.off_value
        return np.where(hits, self.on_value, self.off_value)

    def upper_quantile(self, tail: float = TAIL_MASS) -> float:
        return self.support()[1]

    def to_record(self) -> dict[str, Any]:
        return {
            "kind": self.kind,
            "success_prob": self.success_prob,
            "on_value": self.on_value,
            "off_value": self.off_value,
        }


@dataclass(frozen=True)
class MyersonResult:
    """Optimal posted price, its revenue and the sale probability at that price."""

    price: float
    revenue: float
    quantile: float

    def to_record(self) -> dict[str, float]:
        return {"price": self.price, "revenue": self.revenue, "quantile": self.quantile}


def survival(dist: ValuationDistribution, x):
    return dist.survival(x)


def support(dist: ValuationDistribution) -> tuple[float, float]:
    return dist.support()


def sample(dist: ValuationDistribution, rng: np.random.Generator, size=None):
    return dist.sample(rng, size)


def _result(dist: ValuationDistribution, shift: float, price: float) -> MyersonResult:
    quantile = float(dist.survival(price - shift))
    return MyersonResult(
        price=float(price), revenue=price * quantile, quantile=quantile
    )


def myerson(dist: ValuationDistribution, shift: float) -> MyersonResult:
    """Maximise ``p * P[Theta + shift >= p]`` over posted prices ``p``.

    Uniform laws use the closed form, Bernoulli laws compare the two atom
    prices, and the remaining kinds run a grid search refined by
    golden-section. Ties go to the lowest price.

    Raises:
        NoPositiveRevenue: if no price earns positive revenue.
    """
    if not math.isfinite(shift):
        raise InvalidInstance(f"myerson: shift must be finite, got {shift}")

    lo, hi = dist.support()
    if isinstance(dist, Bernoulli):
        candidates = sorted(a + shift for a in dist.atoms() if a + shift > 0)
        if not candidates:
            raise NoPositiveRevenue(
                f"no positive price sells to {dist.to_record()} shifted by {shift}"
            )
        best = max(
            (_result(dist, shift, p) for p in candidates),
            key=lambda r: r.revenue,
        )
    elif hi + shift <= 0:
        raise NoPositiveRevenue(
            f"support of {dist.to_record()} shifted by {shift} lies below zero"
        )
    elif isinstance(dist, Uniform):
        upper = hi + shift
        price = min(max(upper / 2.0, max(lo + shift, 0.0)), upper)
        best = _result(dist, shift, price)
    else:
        left = max(0.0, lo + shift)
        right = dist.upper_quantile(TAIL_MASS) + shift
        price, _ = maximize_on_interval(
            lambda p: p * dist.survival(p - shift), left, right
        )
        best = _result(dist, shift, price)

    if best.revenue <= 0:
        raise NoPositiveRevenue(
            f"optimal revenue for {dist.to_record()} shifted by {shift} is not positive"
        )
    logger.debug(
        "myerson(%s, shift=%.6g): price=%.12g revenue=%.12g",
        dist.kind,
        shift,
        best.price,
        best.revenue,
    )
    return best
