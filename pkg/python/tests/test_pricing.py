#!/usr/bin/env python3
"""
Pytest unit tests for optimal prices, CoNF of pricing classes and bounds.
"""

import math

import numpy as np
import pytest

from conflab.analytics import rev_newest_static, rev_random_static
from conflab.distributions import Bernoulli, Exponential, Normal, Uniform
from conflab.errors import InvalidParams, NotWellBehaved
from conflab.experiments import dynamic_gap_instance, static_gap_instance
from conflab.model import BetaMean, Instance, Ordering
from conflab.pricing import (
    brute_force_count_table,
    compare_dynamic_prices,
    conf_class,
    dynamic_bounds,
    dynamic_to_static_gain_bound,
    optimal_dynamic_newest,
    optimal_dynamic_random,
    optimal_known_quality,
    optimal_static,
    price_demand_diagnostics,
    static_bound,
)


def _grid_best(revenue, upper, points=20_001):
    grid = np.linspace(0.0, upper, points)
    values = []
    for p in grid:
        try:
            values.append(revenue(float(p)))
        except ValueError:
            values.append(0.0)
    return float(max(values))


class TestStaticPrices:
    """Test class for the best single posted price"""

    def test_random_worked_example(self, worked_example):
        """Test the Random optimum p = 3/4 with revenue 9/16"""
        result = optimal_static(worked_example, Ordering.RANDOM)
        assert result.policy.p == pytest.approx(0.75, abs=1e-6)
        assert result.revenue == pytest.approx(0.5625, abs=1e-9)
        assert result.ordering is Ordering.RANDOM

    def test_newest_beats_grid(self, worked_example):
        """Test the Newest-First optimum against a fine price grid"""
        result = optimal_static(worked_example, "newest")
        best = _grid_best(lambda p: rev_newest_static(worked_example, p), 5 / 3)
        assert result.revenue >= best - 1e-9
        assert result.revenue == pytest.approx(
            rev_newest_static(worked_example, result.policy.p)
        )

    @pytest.mark.parametrize("c", [2, 5, 20])
    def test_random_beats_grid(self, worked_example, c):
        """Test the Random optimum against a grid for wider displays"""
        inst = worked_example.with_(c=c)
        result = optimal_static(inst, Ordering.RANDOM)
        best = _grid_best(lambda p: rev_random_static(inst, p), 2.0, 4001)
        assert result.revenue >= best - 1e-9

    def test_bernoulli_atoms(self):
        """Test that a jump at an atom price is found"""
        inst = Instance(0.5, Bernoulli(0.5, on_value=1.0, off_value=0.0), 1, BetaMean())
        result = optimal_static(inst, Ordering.RANDOM)
        best = _grid_best(lambda p: rev_random_static(inst, p), 2.0)
        assert result.revenue >= best - 1e-9

    def test_known_quality(self, worked_example):
        """Test the known-quality optimum p = 3/4 with revenue 9/16"""
        result = optimal_known_quality(worked_example)
        assert result.policy.p == pytest.approx(0.75)
        assert result.revenue == pytest.approx(0.5625)


class TestDynamicPrices:
    """Test class for count-table optima"""

    def test_random_worked_example(self, worked_example):
        """Test prices (2/3, 5/6) with revenue 41/72"""
        result = optimal_dynamic_random(worked_example)
        np.testing.assert_allclose(result.policy.prices, [2 / 3, 5 / 6], atol=1e-9)
        assert result.revenue == pytest.approx(41 / 72, abs=1e-9)

    def test_newest_worked_example(self, worked_example):
        """Test offset 1/4, prices (7/12, 11/12) and revenue 9/16"""
        result = optimal_dynamic_newest(worked_example)
        assert result.diagnostics.offset == pytest.approx(0.25, abs=1e-9)
        np.testing.assert_allclose(result.policy.prices, [7 / 12, 11 / 12], atol=1e-9)
        assert result.revenue == pytest.approx(0.5625, abs=1e-9)
        record = result.to_record()
        assert record["ordering"] == "newest"
        assert record["diagnostics"]["per_count_prices"] == list(result.policy.prices)

    def test_dynamic_gap(self, dynamic_gap):
        """Test the dynamic-class CoNF 1.25271 at mu = 0.1"""
        report = conf_class(dynamic_gap, "dynamic")
        assert report.rev_random == pytest.approx(0.152204, abs=1e-6)
        assert report.rev_newest == pytest.approx(0.1215, abs=1e-6)
        assert report.chi == pytest.approx(1.25271, abs=1e-5)

    def test_dynamic_gap_approaches_four_thirds(self):
        """Test that the dynamic-class CoNF grows towards 4/3 as mu shrinks"""
        instances = [dynamic_gap_instance(mu) for mu in (0.2, 0.1, 0.02)]
        chis = [conf_class(inst, "dynamic").chi for inst in instances]
        assert chis[0] < chis[1] < chis[2] < 4 / 3

    @pytest.mark.parametrize("mu", [0.2, 0.1, 0.02, 0.001])
    def test_dynamic_gap_closed_form(self, mu):
        """Test 8/9 + (1 - mu)/9 (mu / (1 + mu - 2 mu^2) - 2)^2 on the gap family"""
        expected = 8 / 9 + (1 - mu) / 9 * (mu / (1 + mu - 2 * mu**2) - 2) ** 2
        chi = conf_class(dynamic_gap_instance(mu), "dynamic").chi
        assert chi == pytest.approx(expected, rel=1e-9)
        if mu == 0.001:
            assert chi == pytest.approx(4 / 3, abs=1e-3)

    @pytest.mark.parametrize("c", [1, 2])
    def test_brute_force_newest(self, worked_example, c):
        """Test the review-offsetting policy against an exhaustive grid"""
        inst = worked_example.with_(c=c)
        best = optimal_dynamic_newest(inst)
        grid = brute_force_count_table(inst, Ordering.NEWEST, step=0.01)
        assert grid.revenue <= best.revenue + 1e-9
        assert grid.revenue == pytest.approx(best.revenue, abs=1e-2)

    @pytest.mark.parametrize("c", [1, 2])
    def test_brute_force_random(self, worked_example, c):
        """Test the per-count Myerson prices against an exhaustive grid"""
        inst = worked_example.with_(c=c)
        best = optimal_dynamic_random(inst)
        grid = brute_force_count_table(inst, "random", step=0.01)
        assert grid.revenue <= best.revenue + 1e-9
        assert grid.revenue == pytest.approx(best.revenue, abs=1e-2)

    def test_brute_force_limit(self, worked_example):
        """Test that exhaustive search is refused beyond two reviews"""
        with pytest.raises(InvalidParams):
            brute_force_count_table(worked_example.with_(c=3), Ordering.NEWEST)


class TestPricingClasses:
    """Test class for the CoNF of static and dynamic pricing"""

    def test_dynamic_worked_example(self, worked_example):
        """Test chi_dyn = 656/648"""
        report = conf_class(worked_example, "dynamic")
        assert report.chi == pytest.approx(656 / 648, abs=1e-9)
        assert report.beta == pytest.approx(2.0)
        assert report.non_degenerate

    def test_static_class_at_least_one(self, worked_example):
        """Test that the static-class CoNF is at least 1"""
        for c in (1, 2, 4):
            assert conf_class(worked_example.with_(c=c), "static").chi >= 1.0

    def test_static_gap(self):
        """Test the static-class CoNF of the narrow family against its bound"""
        inst = static_gap_instance(0.1)
        bound = static_bound(inst)
        assert bound == pytest.approx(0.5 * 0.95 / 0.2)
        report = conf_class(inst, "static")
        # Random sells at 0.95; Newest peaks at 0.1 x with x = 3 - sqrt(3)
        x = 3.0 - math.sqrt(3.0)
        newest = 0.2 * x * (2.0 - x) / (3.0 - x)
        assert report.rev_random == pytest.approx(0.475, rel=1e-5)
        assert report.rev_newest == pytest.approx(newest, rel=1e-5)
        assert report.chi == pytest.approx(0.475 / newest, rel=1e-5)
        assert report.chi >= bound

    def test_unknown_class(self, worked_example):
        """Test that only 'static' and 'dynamic' are accepted"""
        with pytest.raises(InvalidParams):
            conf_class(worked_example, "hourly")

    def test_dynamic_bounds(self):
        """Test 2 / P[Theta >= 0] and its refinement"""
        inst = Instance(0.5, Uniform(-1.0, 1.0), 1, BetaMean())
        bounds = dynamic_bounds(inst)
        assert bounds.lower == 1.0
        assert bounds.upper == pytest.approx(4.0)
        # P[Theta >= -2/3] = 5/6 on U[-1, 1]
        assert bounds.refined == pytest.approx(10 / 3)
        assert conf_class(inst, "dynamic").chi <= bounds.refined

    def test_exponential_dynamic(self):
        """Test the dynamic-class CoNF under exponential valuations"""
        inst = Instance(0.3, Exponential(2.0), 3, BetaMean(0.5, 0.5))
        report = conf_class(inst, "dynamic")
        assert 1.0 <= report.chi <= 2.0

    def test_dynamic_bounds_random_instances(self, rng):
        """Test 1 <= chi_dynamic <= min(2 / P[Theta >= 0], refined) on random markets"""
        for trial in range(120):
            if trial % 3 == 0:
                dist = Exponential(float(rng.uniform(0.5, 5.0)))
            else:
                lo = float(rng.uniform(-1.0, 0.5))
                dist = Uniform(lo, lo + float(rng.uniform(0.6, 2.0)))
            inst = Instance(
                float(rng.uniform(0.05, 0.95)),
                dist,
                int(rng.integers(1, 7)),
                BetaMean(float(rng.uniform(0.2, 4.0)), float(rng.uniform(0.2, 4.0))),
            )
            bounds = dynamic_bounds(inst)
            chi = conf_class(inst, "dynamic").chi
            if not 1.0 - 1e-9 <= chi <= min(bounds.upper, bounds.refined) + 1e-9:
                pytest.fail(f"[FAIL] chi {chi} outside {bounds} for {inst.to_record()}")


class TestBoundsAndComparisons:
    """Test class for gain bounds and price comparisons"""

    def test_static_bound_worked_example(self, worked_example):
        """Test mu^c h(c) / (h(0) + theta_bar) = 1/4"""
        assert static_bound(worked_example) == pytest.approx(0.25)

    def test_static_bound_needs_bounded_law(self):
        """Test that unbounded or signed laws are refused"""
        with pytest.raises(InvalidParams):
            static_bound(Instance(0.5, Normal(), 1, BetaMean()))
        with pytest.raises(InvalidParams):
            static_bound(Instance(0.5, Uniform(-1.0, 1.0), 1, BetaMean()))

    def test_gain_bound(self, worked_example):
        """Test the dynamic-to-static gain against its bound"""
        gain = dynamic_to_static_gain_bound(worked_example)
        assert gain.bound == pytest.approx(0.125)
        assert gain.measured >= 1.0 - 1e-9

    def test_compare_prices(self, worked_example):
        """Test that Newest First charges less below hbar and more above"""
        rows = compare_dynamic_prices(worked_example)
        assert [r.sign for r in rows] == [-1, 1]
        assert rows[0].newest == pytest.approx(7 / 12)
        assert rows[1].random == pytest.approx(5 / 6)

    def test_compare_prices_needs_uniform(self):
        """Test that non-uniform laws are refused"""
        with pytest.raises(NotWellBehaved):
            compare_dynamic_prices(Instance(0.5, Exponential(1.0), 1, BetaMean()))

    def test_compare_prices_random_instances(self, rng):
        """Test the price ordering against h(n) - hbar on random uniform markets"""
        for _ in range(100):
            lo = float(rng.uniform(-0.5, 0.5))
            inst = Instance(
                float(rng.uniform(0.05, 0.95)),
                Uniform(lo, lo + float(rng.uniform(0.3, 2.0))),
                int(rng.integers(1, 8)),
                BetaMean(float(rng.uniform(0.2, 4.0)), float(rng.uniform(0.2, 4.0))),
            )
            h_bar = float(inst.count_weights() @ inst.h_values())
            for row in compare_dynamic_prices(inst):
                gap = row.newest - row.random
                if (row.estimate - h_bar) * gap < -1e-9:
                    pytest.fail(
                        f"[FAIL] n={row.n}: price gap {gap} against "
                        f"h(n) - hbar = {row.estimate - h_bar}"
                    )

    def test_price_demand(self, worked_example):
        """Test the expected price ratio and demand ratios stay within bounds"""
        diag = price_demand_diagnostics(worked_example.with_(c=3))
        assert 0.0 < diag.expected_price_ratio <= 2.0
        assert diag.max_demand_ratio <= 1.0
        assert len(diag.demand_ratios) == 4


if __name__ == "__main__":
    pytest.main([__file__])
