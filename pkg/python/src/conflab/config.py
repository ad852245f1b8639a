"""JSON experiment documents and their translation into model objects.

A document is a mapping with the top-level keys ``instance``, ``price`` or
``pricing``, ``ordering``, ``simulation`` and ``sweep``. Every parser takes
the dotted path of the record it reads so errors name the exact field.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Optional, Sequence

from .distributions import (
    Bernoulli,
    Exponential,
    Normal,
    Uniform,
    ValuationDistribution,
)
from .errors import ConfigInvalid, ConfLabError
from .model import (
    BetaMean,
    BetaQuantile,
    CountTable,
    Estimator,
    Instance,
    PricingPolicy,
    StateTable,
    Static,
    Table,
)
from .simulator import (
    Baseline,
    CoarseRatings,
    IncreasingQuality,
    MarkovQuality,
    SimConfig,
    SimOrdering,
    TimeVaryingPrior,
    Variant,
)

logger = logging.getLogger(__name__)

SWEEP_AXES = ("price", "c", "w", "gamma", "xi", "mu", "epsilon", "prior_strength")
EXPERIMENT_KINDS = ("analyze", "optimize", "simulate", "sweep", "verify")

_MISSING = object()


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _mapping(value: Any, path: str) -> Mapping[str, Any]:
    if not isinstance(value, Mapping):
        raise ConfigInvalid(path, f"expected an object, got {type(value).__name__}")
    return value


Record = Mapping[str, Any]


def _get(record: Record, key: str, path: str, default: Any = _MISSING) -> Any:
    if key in record:
        return record[key]
    if default is _MISSING:
        raise ConfigInvalid(_join(path, key), "missing required field")
    return default


def _number(record: Record, key: str, path: str, default: Any = _MISSING) -> float:
    value = _get(record, key, path, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigInvalid(_join(path, key), f"expected a number, got {value!r}")
    return float(value)


def _integer(record: Record, key: str, path: str, default: Any = _MISSING) -> int:
    value = _get(record, key, path, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigInvalid(_join(path, key), f"expected an integer, got {value!r}")
    return value


def _numbers(record: Record, key: str, path: str) -> list[float]:
    values = _get(record, key, path)
    where = _join(path, key)
    if not isinstance(values, Sequence) or isinstance(values, str):
        raise ConfigInvalid(where, f"expected a list of numbers, got {values!r}")
    out = []
    for i, v in enumerate(values):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigInvalid(f"{where}[{i}]", f"expected a number, got {v!r}")
        out.append(float(v))
    return out


def _build(path: str, factory: Callable[..., Any], *args: Any) -> Any:
    """Call a constructor, turning invariant violations into ConfigInvalid."""
    try:
        return factory(*args)
    except ConfigInvalid:
        raise
    except ConfLabError as exc:
        raise ConfigInvalid(path, str(exc)) from None


def _kind(record: Mapping[str, Any], path: str) -> str:
    kind = _get(record, "kind", path)
    if not isinstance(kind, str):
        raise ConfigInvalid(_join(path, "kind"), f"expected a string, got {kind!r}")
    return kind


def parse_distribution(
    record: Any, path: str = "instance.dist"
) -> ValuationDistribution:
    record = _mapping(record, path)
    kind = _kind(record, path)
    if kind == "uniform":
        args = (_number(record, "lo", path, 0.0), _number(record, "hi", path, 1.0))
        return _build(path, Uniform, *args)
    if kind == "exponential":
        return _build(path, Exponential, _number(record, "rate", path))
    if kind == "normal":
        args = (_number(record, "mean", path, 0.0), _number(record, "sd", path, 1.0))
        return _build(path, Normal, *args)
    if kind == "bernoulli":
        args = (
            _number(record, "success_prob", path),
            _number(record, "on_value", path, 1.0),
            _number(record, "off_value", path, 0.0),
        )
        return _build(path, Bernoulli, *args)
    raise ConfigInvalid(_join(path, "kind"), f"unknown distribution {kind!r}")


def parse_estimator(record: Any, path: str = "instance.estimator") -> Estimator:
    record = _mapping(record, path)
    kind = _kind(record, path)
    if kind == "beta_mean":
        args = (_number(record, "a", path), _number(record, "b", path))
        return _build(path, BetaMean, *args)
    if kind == "beta_quantile":
        args = (
            _number(record, "a", path),
            _number(record, "b", path),
            _number(record, "phi", path),
        )
        return _build(path, BetaQuantile, *args)
    if kind == "table":
        return _build(path, Table, tuple(_numbers(record, "values", path)))
    raise ConfigInvalid(_join(path, "kind"), f"unknown estimator {kind!r}")


def parse_instance(record: Any, path: str = "instance") -> Instance:
    record = _mapping(record, path)
    mu = _number(record, "mu", path)
    c = _integer(record, "c", path)
    dist = parse_distribution(_get(record, "dist", path), _join(path, "dist"))
    estimator = parse_estimator(
        _get(record, "estimator", path), _join(path, "estimator")
    )
    return _build(path, Instance, mu, dist, c, estimator)


def parse_policy(record: Any, path: str = "pricing") -> PricingPolicy:
    if isinstance(record, (int, float)) and not isinstance(record, bool):
        return Static(float(record))
    record = _mapping(record, path)
    kind = _kind(record, path)
    if kind == "static":
        return _build(path, Static, _number(record, "price", path))
    if kind == "count_table":
        return _build(path, CountTable, tuple(_numbers(record, "prices", path)))
    if kind == "state_table":
        prices = _mapping(_get(record, "prices", path), _join(path, "prices"))
        return _build(path, StateTable.from_mapping, prices)
    raise ConfigInvalid(_join(path, "kind"), f"unknown pricing policy {kind!r}")


def document_policy(doc: Mapping[str, Any]) -> Optional[PricingPolicy]:
    """The ``pricing`` record, or a static policy from a bare ``price``."""
    if "pricing" in doc:
        return parse_policy(doc["pricing"], "pricing")
    if "price" in doc:
        return Static(_number(doc, "price", ""))
    return None


def document_price(doc: Mapping[str, Any]) -> float:
    policy = document_policy(doc)
    if not isinstance(policy, Static):
        raise ConfigInvalid("price", "a static price is required for this experiment")
    return policy.p


def parse_ordering(value: Any, path: str = "ordering") -> SimOrdering:
    if isinstance(value, str):
        return SimOrdering(value)
    record = _mapping(value, path)
    kind = _kind(record, path)
    if kind != "window":
        return SimOrdering(kind)
    return SimOrdering.window(_integer(record, "w", path))


def parse_variant(record: Any, path: str = "simulation.variant") -> Variant:
    if record is None:
        return Baseline()
    record = _mapping(record, path)
    kind = _kind(record, path)
    if kind == "baseline":
        return Baseline()
    if kind == "time_varying_prior":
        return TimeVaryingPrior(_number(record, "gamma", path))
    if kind == "increasing_quality":
        return IncreasingQuality(
            _number(record, "mu_lo", path), _number(record, "mu_hi", path)
        )
    if kind == "markov_quality":
        return MarkovQuality(
            _number(record, "mu_lo", path),
            _number(record, "mu_hi", path),
            _number(record, "xi", path),
        )
    if kind == "coarse_ratings":
        return CoarseRatings()
    raise ConfigInvalid(_join(path, "kind"), f"unknown variant {kind!r}")


def with_simulation_overrides(doc: Record, **overrides: Any) -> dict[str, Any]:
    """Copy of ``doc`` whose simulation block takes the non-None ``overrides``."""
    updates = {k: v for k, v in overrides.items() if v is not None}
    out = dict(_mapping(doc, ""))
    if updates:
        sim = dict(_mapping(out.get("simulation", {}), "simulation"))
        sim.update(updates)
        out["simulation"] = sim
    return out


def parse_simulation(doc: Mapping[str, Any], **overrides: Any) -> SimConfig:
    """SimConfig from a document; non-None ``overrides`` replace simulation fields."""
    doc = with_simulation_overrides(doc, **overrides)
    inst = parse_instance(_get(doc, "instance", ""))
    sim = _mapping(_get(doc, "simulation", ""), "simulation")
    path = "simulation"
    policy = document_policy(doc)
    if policy is None:
        raise ConfigInvalid("pricing", "missing required field")
    burn_in = sim.get("burn_in")
    if burn_in is not None:
        burn_in = _integer(sim, "burn_in", path)
    return SimConfig(
        inst=inst,
        ordering=parse_ordering(_get(doc, "ordering", ""), "ordering"),
        pricing=policy,
        rounds=_integer(sim, "rounds", path),
        replications=_integer(sim, "replications", path),
        seed=_integer(sim, "seed", path, 0),
        variant=parse_variant(sim.get("variant"), _join(path, "variant")),
        burn_in=burn_in,
        record_trajectory=bool(sim.get("record_trajectory", False)),
    )


_RANGE = re.compile(r"^\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*$")


def parse_values(text: str, path: str = "sweep.values") -> list[float]:
    """``"1..50"`` (inclusive integer range) or a comma-separated list."""
    match = _RANGE.match(text)
    if match:
        lo, hi = int(match.group(1)), int(match.group(2))
        if hi < lo:
            raise ConfigInvalid(path, f"empty range {text!r}")
        return [float(v) for v in range(lo, hi + 1)]
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        message = f"expected numbers or a range like 1..50, got {text!r}"
        raise ConfigInvalid(path, message) from None
    if not values:
        raise ConfigInvalid(path, "no values given")
    return values


@dataclass(frozen=True)
class ExperimentSpec:
    """One CLI run: what to compute, from which document, and where to write it."""

    name: str
    kind: str
    document: Mapping[str, Any]
    axis: Optional[str] = None
    values: tuple[float, ...] = field(default_factory=tuple)
    out: Optional[Path] = None

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigInvalid("kind", f"unknown experiment {self.kind!r}")
        if self.kind == "sweep":
            if self.axis not in SWEEP_AXES:
                raise ConfigInvalid(
                    "sweep.axis", f"expected one of {SWEEP_AXES}, got {self.axis!r}"
                )
            if not self.values:
                raise ConfigInvalid("sweep.values", "no values given")


def parse_sweep(doc: Mapping[str, Any]) -> tuple[Optional[str], tuple[float, ...]]:
    """Axis and values from the document's optional ``sweep`` block."""
    if "sweep" not in doc:
        return None, ()
    sweep = _mapping(doc["sweep"], "sweep")
    axis = _get(sweep, "axis", "sweep")
    raw = _get(sweep, "values", "sweep")
    if isinstance(raw, str):
        return axis, tuple(parse_values(raw))
    return axis, tuple(_numbers(sweep, "values", "sweep"))


def load_document(path: str | Path) -> dict[str, Any]:
    """Read a JSON document; a missing file raises FileNotFoundError."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigInvalid("", f"{path}: invalid JSON ({exc})") from None
    logger.debug("Loaded configuration %s", path)
    return dict(_mapping(doc, ""))
