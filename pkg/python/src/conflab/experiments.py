"""Preset instance families, parameter sweeps and oracle verification runs.

Everything here works on parsed JSON documents (see :mod:`conflab.config`)
and returns plain records or pandas frames; the CLI only prints them.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Mapping, Optional

import numpy as np
import pandas as pd

from . import analytics, markov, pricing, simulator
from .analytics import NonstationarySteadyState
from .config import (
    ExperimentSpec,
    document_policy,
    document_price,
    parse_instance,
    parse_simulation,
    parse_variant,
)
from .distributions import Exponential, Uniform
from .errors import (
    AbsorbingPrice,
    ConfigInvalid,
    InvalidInstance,
    InvalidParams,
    OracleFailure,
)
from .markov import FiniteChain
from .model import (
    BetaMean,
    BetaQuantile,
    Instance,
    Ordering,
    PricingPolicy,
    Static,
    Table,
    validate_price,
)
from .parallel import ordered_map
from .simulator import (
    Baseline,
    CoarseRatings,
    IncreasingQuality,
    MarkovQuality,
    SimConfig,
    SimOrdering,
    SimResult,
    TimeVaryingPrior,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Preset families
# ---------------------------------------------------------------------------

LIMITED_ATTENTION_PRICE = 1.0
PRIOR_STRENGTHS = (0.05, 0.5, 5.0)

# Largest c whose per-state Newest-First law is included in analyze output.
STATE_DUMP_MAX_C = 10


def limited_attention_family(mu: float, c: int) -> Instance:
    """U[-1, 1] valuations, posterior-mean estimates under a Beta(mu, 1 - mu) prior.

    At price 1 the Random revenue is mu / 2 for every c.
    """
    return Instance(mu, Uniform(-1.0, 1.0), c, BetaMean(mu, 1.0 - mu))


def prior_strength_family(a: float, epsilon: float, kind: str = "uniform") -> Instance:
    """One review, mu = 1/2 and a Beta(a, a) prior.

    ``epsilon`` is the spread of the valuation law: U[-epsilon, epsilon] for
    ``kind="uniform"``, an exponential law with mean epsilon otherwise.
    """
    if not epsilon > 0:
        raise InvalidParams(f"epsilon must be positive, got {epsilon}")
    if kind == "uniform":
        dist = Uniform(-epsilon, epsilon)
    elif kind == "exponential":
        dist = Exponential(1.0 / epsilon)
    else:
        raise InvalidParams(f"kind must be 'uniform' or 'exponential', got {kind!r}")
    return Instance(0.5, dist, 1, BetaMean(a, a))


def dynamic_gap_instance(mu: float) -> Instance:
    """Table(mu^2, 1 - mu^2) estimates with U[0, 2 hbar] valuations.

    The dynamic-class CoNF of this family approaches 4/3 as mu goes to 0.
    """
    h_bar = mu * (1.0 - mu) * (1.0 + 2.0 * mu)
    return Instance(mu, Uniform(0.0, 2.0 * h_bar), 1, Table((mu**2, 1.0 - mu**2)))


def static_gap_instance(
    theta_bar: float, mu: float = 0.5, high: float = 0.95
) -> Instance:
    """Narrow U[0, theta_bar] valuations with estimates (theta_bar, ``high``).

    A negative review leaves the estimate at the top of the valuation range,
    so Newest First must price below 2 theta_bar while Random can charge
    about ``high``; the static-class CoNF grows like 1 / theta_bar.
    """
    return Instance(mu, Uniform(0.0, theta_bar), 1, Table((theta_bar, high)))


def _switching_base() -> Instance:
    return Instance(0.5, Uniform(0.0, 1.0), 1, Table((0.25, 0.75)))


@dataclass(frozen=True)
class SwitchingExample:
    """Two-level quality with a calibrated estimate h = (mu_lo, mu_hi)."""

    mu_lo: float = 0.25
    mu_hi: float = 0.75
    xi: float = 0.5
    price: float = 1.0
    base: Instance = field(default_factory=_switching_base)

    def steady(self, xi: Optional[float] = None, belief_error: bool = True):
        xi = self.xi if xi is None else xi
        return analytics.ns_steady(
            self.mu_lo, self.mu_hi, xi, self.price, self.base, belief_error
        )

    def chain(self, xi: Optional[float] = None) -> FiniteChain:
        xi = self.xi if xi is None else xi
        return markov.build_nonstationary_chain(
            self.mu_lo, self.mu_hi, xi, self.price, self.base
        )

    def calibrated(self) -> bool:
        h0, h1 = self.base.h_values()
        tol = analytics.CALIBRATION_TOL
        return abs(h0 - self.mu_lo) <= tol and abs(h1 - self.mu_hi) <= tol


def switching_example() -> SwitchingExample:
    return SwitchingExample()


# ---------------------------------------------------------------------------
# Single runs
# ---------------------------------------------------------------------------


def _document_instance(doc: Mapping[str, Any]) -> Instance:
    return parse_instance(doc.get("instance"), "instance")


def _required_policy(doc: Mapping[str, Any]) -> PricingPolicy:
    policy = document_policy(doc)
    if policy is None:
        raise ConfigInvalid("price", "missing required field")
    return policy


def run_analyze(doc: Mapping[str, Any]) -> dict[str, Any]:
    """Revenues, CoNF and stationary laws of the document's pricing policy."""
    inst = _document_instance(doc)
    policy = _required_policy(doc)
    record: dict[str, Any] = {
        "instance": inst.to_record(),
        "pricing": policy.to_record(),
    }

    if isinstance(policy, Static):
        price = policy.p
        assumptions = validate_price(inst, price)
        record["assumptions"] = {**asdict(assumptions), "ok": assumptions.ok}
        record["conf"] = analytics.conf_static(inst, price).to_record()
        record["conf_lower_bound"] = analytics.conf_lower_bound_static(inst, price)
        record["stationary"] = {
            "newest": analytics.stationary_newest_counts(inst, price).tolist(),
            "random": analytics.stationary_random_counts(inst).tolist(),
        }
        record["expected_positive_reviews"] = {
            o.value: analytics.expected_positive_reviews(inst, price, o)
            for o in Ordering
        }
        known = analytics.rev_known_quality(inst, price)
        record["known_quality"] = {"revenue": known}
        if known > 0:
            ratio = analytics.known_quality_ratio(inst, price)
            record["known_quality"]["ratio"] = ratio
        return record

    rev_newest = analytics.rev_newest_dynamic(inst, policy)
    rev_random = analytics.rev_random_dynamic(inst, policy)
    record["revenue"] = {"newest": rev_newest, "random": rev_random}
    record["chi"] = rev_random / rev_newest
    if inst.c <= STATE_DUMP_MAX_C:
        record["stationary_newest_states"] = analytics.stationary_newest_states(
            inst, policy
        ).as_dict()
    return record


def run_optimize(doc: Mapping[str, Any]) -> dict[str, Any]:
    """Optimal policies of both pricing classes and the bounds that apply."""
    inst = _document_instance(doc)
    static = {
        o.value: pricing.optimal_static(inst, o).to_record() for o in Ordering
    }
    static["conf"] = pricing.conf_class(inst, "static").to_record()
    dynamic = {
        "random": pricing.optimal_dynamic_random(inst).to_record(),
        "newest": pricing.optimal_dynamic_newest(inst).to_record(),
        "conf": pricing.conf_class(inst, "dynamic").to_record(),
        "bounds": pricing.dynamic_bounds(inst).to_record(),
    }
    record: dict[str, Any] = {
        "instance": inst.to_record(),
        "static": static,
        "dynamic": dynamic,
        "known_quality": pricing.optimal_known_quality(inst).to_record(),
        "price_demand": pricing.price_demand_diagnostics(inst).to_record(),
    }
    if isinstance(inst.dist, Uniform):
        dynamic["price_comparison"] = [
            row.to_record() for row in pricing.compare_dynamic_prices(inst)
        ]
    lo, _ = inst.dist.support()
    if lo >= 0 and inst.dist.is_bounded():
        static["lower_bound"] = pricing.static_bound(inst)
        record["dynamic_gain"] = pricing.dynamic_to_static_gain_bound(inst).to_record()
    return record


_VARIANT_RUNNERS: dict[type, Callable[[SimConfig], SimResult]] = {
    TimeVaryingPrior: simulator.run_variant_time_varying_prior,
    IncreasingQuality: simulator.run_variant_increasing_quality,
    MarkovQuality: simulator.run_variant_markov_quality,
    CoarseRatings: simulator.run_variant_coarse_ratings,
}


def run_simulate(doc: Mapping[str, Any]) -> SimResult:
    config = parse_simulation(doc)
    runner = _VARIANT_RUNNERS.get(type(config.variant), simulator.run)
    return runner(config)


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

_INTEGER_AXES = ("c", "w")
_PRICE_COLUMNS = ("rev_random", "rev_newest", "chi", "beta")


def _sim_block(doc: Mapping[str, Any]) -> Mapping[str, Any]:
    sim = doc.get("simulation")
    return sim if isinstance(sim, Mapping) else {}


def _variant(doc: Mapping[str, Any]):
    return parse_variant(_sim_block(doc).get("variant"), "simulation.variant")


def _simulates(axis: str, doc: Mapping[str, Any]) -> bool:
    """Whether points on ``axis`` run the simulator rather than closed forms."""
    if axis == "gamma":
        return True
    if axis == "xi":
        return "rounds" in _sim_block(doc)
    variant = _variant(doc)
    if axis == "w":
        return isinstance(variant, IncreasingQuality)
    if axis == "price":
        return isinstance(variant, CoarseRatings)
    return False


def _base_simulation(doc: Mapping[str, Any]) -> SimConfig:
    return parse_simulation({**doc, "ordering": doc.get("ordering", "newest")})


def _swept_instance(inst: Instance, axis: str, value: float) -> Instance:
    if axis == "c":
        return inst.with_(c=int(value))
    if axis == "mu":
        return inst.with_(mu=value)
    if axis == "epsilon":
        if value <= 0:
            raise ConfigInvalid(
                "sweep.values", f"epsilon must be positive, got {value}"
            )
        if isinstance(inst.dist, Exponential):
            return inst.with_(dist=Exponential(1.0 / value))
        return inst.with_(dist=Uniform(-value, value))
    if axis == "prior_strength":
        est = inst.estimator
        if not isinstance(est, (BetaMean, BetaQuantile)):
            raise ConfigInvalid(
                "instance.estimator", "prior_strength sweeps need a Beta estimator"
            )
        share = est.a / (est.a + est.b)
        prior = est.with_prior(value * share, value * (1.0 - share))
        return inst.with_(estimator=prior)
    return inst


def _analytic_row(inst: Instance, price: Optional[float]) -> dict[str, float]:
    row: dict[str, float] = {}
    if price is not None:
        try:
            report = analytics.conf_static(inst, price)
        except AbsorbingPrice as exc:
            logger.warning("%s; per-price columns left empty", exc)
            row.update(dict.fromkeys(_PRICE_COLUMNS, math.nan))
        else:
            row.update({k: getattr(report, k) for k in _PRICE_COLUMNS})
    for cls in ("static", "dynamic"):
        report = pricing.conf_class(inst, cls)
        row[f"chi_{cls}"] = report.chi
        row[f"rev_random_{cls}"] = report.rev_random
        row[f"rev_newest_{cls}"] = report.rev_newest
    return row


def _simulated(config: SimConfig, label: str) -> dict[str, float]:
    result = simulator.run(config)
    return {label: result.avg_revenue_per_round, f"{label}_stderr": result.stderr}


def _gamma_row(doc: Mapping[str, Any], gamma: float) -> dict[str, float]:
    base = replace(_base_simulation(doc), variant=TimeVaryingPrior(gamma))
    row: dict[str, float] = {}
    for kind in ("newest", "random_finite_pool", "random_iid"):
        row.update(_simulated(replace(base, ordering=SimOrdering(kind)), f"rev_{kind}"))
    return row


def _xi_row(doc: Mapping[str, Any], xi: float) -> dict[str, float]:
    variant = _variant(doc)
    if not isinstance(variant, MarkovQuality):
        raise ConfigInvalid(
            "simulation.variant", "xi sweeps need a markov_quality variant"
        )
    setup = SwitchingExample(
        variant.mu_lo, variant.mu_hi, xi, document_price(doc), _document_instance(doc)
    )
    steady = setup.steady(belief_error=setup.calibrated())
    row = {f"pi_{label}": steady[label] for label in markov.NONSTATIONARY_STATES}
    row["pi_negative"] = steady.pi_negative
    row["rev_newest"] = steady.rev_newest
    row["rev_random"] = steady.rev_random
    row["belief_error_newest"] = _or_nan(steady.belief_error_newest)
    row["belief_error_random"] = _or_nan(steady.belief_error_random)
    if "rounds" in _sim_block(doc):
        base = replace(_base_simulation(doc), variant=replace(variant, xi=xi))
        for kind, label in (("newest", "newest"), ("random_iid", "random")):
            result = simulator.run(replace(base, ordering=SimOrdering(kind)))
            row[f"sim_rev_{label}"] = result.avg_revenue_per_round
            row[f"sim_rev_{label}_stderr"] = result.stderr
            row[f"sim_belief_error_{label}"] = result.belief_error
            row[f"sim_belief_error_{label}_stderr"] = result.belief_error_stderr
    return row


def _or_nan(value: Optional[float]) -> float:
    return math.nan if value is None else value


def _window_row(doc: Mapping[str, Any], w: int) -> dict[str, float]:
    inst = _document_instance(doc)
    if isinstance(_variant(doc), IncreasingQuality):
        config = replace(_base_simulation(doc), ordering=SimOrdering.window(w))
        return _simulated(config, "rev_window")
    price = document_price(doc)
    return {
        "rev_window": analytics.window_revenue(inst, w, price),
        "rev_newest": analytics.rev_newest_static(inst, price),
        "rev_random": analytics.rev_random_static(inst, price),
    }


def _coarse_row(doc: Mapping[str, Any], price: float) -> dict[str, float]:
    base = replace(_base_simulation(doc), pricing=Static(price))
    row = _simulated(replace(base, ordering=SimOrdering("newest")), "coarse_newest")
    row.update(
        _simulated(
            replace(base, ordering=SimOrdering("random_finite_pool")), "coarse_random"
        )
    )
    observed = simulator.observed_quality_baseline(base.inst)
    try:
        row["baseline_newest"] = analytics.rev_newest_static(observed, price)
    except AbsorbingPrice:
        row["baseline_newest"] = 0.0
    row["baseline_random"] = analytics.rev_random_static(observed, price)
    return row


def _sweep_point(task: tuple[str, float, Mapping[str, Any]]) -> dict[str, float]:
    """One CSV row; module level so the worker pool can pickle it."""
    axis, value, doc = task
    if axis in _INTEGER_AXES:
        if value != int(value):
            raise ConfigInvalid("sweep.values", f"{axis} takes integers, got {value}")
        value = int(value)
    row: dict[str, float] = {axis: value}
    try:
        if axis == "gamma":
            row.update(_gamma_row(doc, value))
        elif axis == "xi":
            row.update(_xi_row(doc, value))
        elif axis == "w":
            row.update(_window_row(doc, value))
        elif axis == "price" and isinstance(_variant(doc), CoarseRatings):
            row.update(_coarse_row(doc, value))
        else:
            inst = _swept_instance(_document_instance(doc), axis, value)
            price = value if axis == "price" else None
            if price is None and document_policy(doc) is not None:
                price = document_price(doc)
            row.update(_analytic_row(inst, price))
    except InvalidInstance as exc:
        raise ConfigInvalid("sweep.values", f"{axis}={value}: {exc}") from None
    logger.debug("Sweep point %s=%s done", axis, value)
    return row


def run_sweep(spec: ExperimentSpec) -> pd.DataFrame:
    """One row per axis value, in increasing axis order.

    Closed-form points fan out over the worker pool. Simulated points run
    one after another and parallelise their replications instead.
    """
    if spec.kind != "sweep":
        raise ConfigInvalid("kind", f"expected a sweep, got {spec.kind!r}")
    tasks = [(spec.axis, v, spec.document) for v in sorted(spec.values)]
    if _simulates(spec.axis, spec.document):
        rows = [_sweep_point(task) for task in tasks]
    else:
        rows = ordered_map(_sweep_point, tasks)
    frame = pd.DataFrame(rows)
    logger.info("Sweep %s over %s finished: %d rows", spec.name, spec.axis, len(frame))
    return frame


def write_csv(frame: pd.DataFrame, path: str | Path) -> Path:
    path = Path(path)
    frame.to_csv(path, index=False, float_format="%.12g", lineterminator="\n")
    logger.info("Wrote %d rows to %s", len(frame), path)
    return path


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

EXACT_TOL = 1e-9
SIM_GATE = 5.0
VERIFY_MAX_C = 10
VERIFY_MAX_WINDOW = 8
LAZY_CHAIN_COUNT = 50
LAZY_CHAIN_MAX_STATES = 8
XI_GRID = (0.1, 0.25, 0.5, 0.75, 1.0)


@dataclass(frozen=True)
class OracleCheck:
    """Largest disagreement between two independent computations."""

    name: str
    discrepancy: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.discrepancy <= self.tolerance)

    def to_record(self) -> dict[str, Any]:
        return {**asdict(self), "passed": self.passed}


@dataclass(frozen=True)
class VerifyReport:
    checks: tuple[OracleCheck, ...]

    @property
    def ok(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> tuple[OracleCheck, ...]:
        return tuple(check for check in self.checks if not check.passed)

    @property
    def max_discrepancy(self) -> float:
        return max((check.discrepancy for check in self.checks), default=0.0)

    def to_record(self) -> dict[str, Any]:
        return {
            "ok": self.ok,
            "max_discrepancy": self.max_discrepancy,
            "checks": [check.to_record() for check in self.checks],
        }

    def raise_for_failures(self) -> None:
        if self.failures:
            names = ", ".join(
                f"{c.name} ({c.discrepancy:.3g} > {c.tolerance:.3g})"
                for c in self.failures
            )
            raise OracleFailure(f"{len(self.failures)} oracle checks failed: {names}")


def _max_abs(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def _newest_checks(inst: Instance, price: float) -> list[OracleCheck]:
    policy = Static(price)
    q = markov.state_purchase_probs(inst, policy)
    solved = markov.stationary_solve(markov.build_newest_chain(inst, policy))
    closed = analytics.stationary_newest_states(inst, policy)
    lazy = markov.lazify(markov.build_iid_chain(inst.c, inst.mu), q)
    chain_revenue = price * float(solved.probs @ q)
    return [
        OracleCheck(
            "newest.stationary", _max_abs(solved.probs, closed.probs), EXACT_TOL
        ),
        OracleCheck(
            "newest.lazy_form",
            _max_abs(solved.probs, lazy.stationary.probs),
            EXACT_TOL,
        ),
        OracleCheck(
            "newest.revenue",
            abs(chain_revenue - analytics.rev_newest_static(inst, price)),
            EXACT_TOL,
        ),
    ]


def _window_checks(inst: Instance, price: float) -> list[OracleCheck]:
    worst = 0.0
    for w in range(inst.c, VERIFY_MAX_WINDOW + 1):
        chain = markov.build_window_chain(inst, w, price)
        solved = markov.stationary_solve(chain)
        by_count = markov.window_purchase_probs(inst, w, price)
        q = by_count[[label.count("1") for label in chain.states]]
        chain_revenue = price * float(solved.probs @ q)
        exact = analytics.window_revenue(inst, w, price)
        worst = max(worst, abs(chain_revenue - exact))
    return [OracleCheck("window.revenue", worst, EXACT_TOL)]


def _lazy_checks(rng: np.random.Generator) -> list[OracleCheck]:
    worst = 0.0
    for _ in range(LAZY_CHAIN_COUNT):
        n = int(rng.integers(2, LAZY_CHAIN_MAX_STATES + 1))
        matrix = rng.random((n, n)) + 0.05
        matrix /= matrix.sum(axis=1, keepdims=True)
        chain = FiniteChain.from_dense([f"s{i}" for i in range(n)], matrix)
        lazy = markov.lazify(chain, rng.uniform(0.05, 1.0, n))
        solved = markov.stationary_solve(lazy.chain)
        worst = max(worst, _max_abs(solved.probs, lazy.stationary.probs))
    return [OracleCheck("lazy.stationary", worst, EXACT_TOL)]


def _switching_setup(doc: Mapping[str, Any], inst: Instance, price: float):
    variant = _variant(doc)
    if isinstance(variant, MarkovQuality) and inst.c == 1:
        return SwitchingExample(variant.mu_lo, variant.mu_hi, variant.xi, price, inst)
    return switching_example()


def _switching_checks(setup: SwitchingExample) -> list[OracleCheck]:
    calibrated = setup.calibrated()
    levels = {"L": setup.mu_lo, "H": setup.mu_hi}
    h = setup.base.h_values()
    q = setup.base.dist.survival(setup.price - h)
    worst_pi = worst_rev = worst_belief = 0.0
    for xi in XI_GRID:
        steady: NonstationarySteadyState = setup.steady(xi, belief_error=calibrated)
        solved = markov.stationary_solve(setup.chain(xi))
        worst_pi = max(worst_pi, _max_abs(solved.probs, steady.pi))
        sells = sum(solved[label] * q[int(label[0])] for label in solved.states)
        worst_rev = max(worst_rev, abs(setup.price * sells - steady.rev_newest))
        if calibrated:
            error = sum(
                solved[label] * (h[int(label[0])] - levels[label[1]]) ** 2
                for label in solved.states
            )
            worst_belief = max(worst_belief, abs(error - steady.belief_error_newest))
    checks = [
        OracleCheck("switching.stationary", worst_pi, EXACT_TOL),
        OracleCheck("switching.revenue", worst_rev, EXACT_TOL),
    ]
    if calibrated:
        checks.append(OracleCheck("switching.belief_error", worst_belief, EXACT_TOL))
    return checks


def _simulation_checks(doc: Mapping[str, Any], inst: Instance, price: float):
    base = replace(
        _base_simulation(doc), inst=inst, pricing=Static(price), variant=Baseline()
    )
    if base.replications < 2:
        logger.warning("Simulation checks need at least 2 replications; skipped")
        return []
    w = max(2, inst.c)
    cases = (
        (SimOrdering("newest"), analytics.rev_newest_static(inst, price)),
        (SimOrdering("random_iid"), analytics.rev_random_static(inst, price)),
        (SimOrdering.window(w), analytics.window_revenue(inst, w, price)),
    )
    checks = []
    for ordering, expected in cases:
        result = simulator.run(replace(base, ordering=ordering))
        name = f"simulate.{ordering.kind}" + (f"_{ordering.w}" if ordering.w else "")
        checks.append(
            OracleCheck(
                name,
                abs(result.avg_revenue_per_round - expected),
                SIM_GATE * result.stderr,
            )
        )
    return checks


def run_verify(spec: ExperimentSpec) -> VerifyReport:
    """Cross-check closed forms against chain solves and the simulator.

    Deterministic for a fixed document: random test chains and simulations
    both derive from ``simulation.seed`` (0 when absent).
    """
    doc = spec.document
    inst = _document_instance(doc)
    price = document_price(doc)
    seed = _sim_block(doc).get("seed", 0)

    checks: list[OracleCheck] = []
    if inst.c <= VERIFY_MAX_C:
        checks += _newest_checks(inst, price)
    else:
        logger.info("Skipping chain checks: c=%d exceeds %d", inst.c, VERIFY_MAX_C)
    checks += _window_checks(inst, price)
    checks += _lazy_checks(np.random.default_rng(seed))
    checks += _switching_checks(_switching_setup(doc, inst, price))
    if "rounds" in _sim_block(doc):
        checks += _simulation_checks(doc, inst, price)

    report = VerifyReport(tuple(checks))
    for check in report.checks:
        logger.debug(
            "%s: %.3g (tolerance %.3g)", check.name, check.discrepancy, check.tolerance
        )
    logger.info(
        "Verified %d checks, max discrepancy %.3g, %d failures",
        len(report.checks),
        report.max_discrepancy,
        len(report.failures),
    )
    return report
