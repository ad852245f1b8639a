#!/usr/bin/env python3
"""
Pytest reproductions of the headline experiments at reduced scale.

Everything here is marked slow; deselect with ``-m "not slow"`` for a quick run.
"""

import time
from dataclasses import replace

import numpy as np
import pytest

from conflab.analytics import rev_newest_static, rev_random_static
from conflab.config import (
    ExperimentSpec,
    load_document,
    parse_simulation,
    with_simulation_overrides,
)
from conflab.experiments import run_sweep, static_gap_instance
from conflab.model import Static
from conflab.pricing import conf_class, static_bound
from conflab.simulator import SimConfig, SimOrdering, TimeVaryingPrior, run

pytestmark = pytest.mark.slow

GATE = 5.0


def _sweep(doc, axis, values):
    return run_sweep(ExperimentSpec("reproduction", "sweep", doc, axis, tuple(values)))


def _trajectories(base):
    paths = {}
    for kind in ("newest", "random_iid", "random_finite_pool"):
        result = run(replace(base, ordering=SimOrdering(kind)))
        paths[kind] = result.revenue_trajectory
    return paths


class TestMonteCarloAgreement:
    """Test class for long simulations against the closed forms"""

    @pytest.mark.parametrize("ordering", ["newest", "random_iid"])
    def test_worked_example(self, worked_example_path, worked_example, ordering):
        """Test 10^5 rounds over 16 replications against the exact revenue"""
        doc = load_document(worked_example_path)
        config = parse_simulation(doc, rounds=100_000, replications=16)
        result = run(replace(config, ordering=SimOrdering(ordering)))
        if ordering == "newest":
            exact = rev_newest_static(worked_example, 1.0)
        else:
            exact = rev_random_static(worked_example, 1.0)
        gap = abs(result.avg_revenue_per_round - exact)
        if gap > GATE * result.stderr + 1e-9:
            pytest.fail(
                f"[FAIL] {ordering}: simulated {result.avg_revenue_per_round:.6f} "
                f"vs exact {exact:.6f} (stderr {result.stderr:.2e})"
            )


class TestLimitedAttention:
    """Test class for the display-size sweep"""

    def test_newest_curve_dips(self, data_dir):
        """Test a flat Random curve at mu/2 and a Newest curve that dips then rises"""
        doc = load_document(data_dir / "limited_attention.json")
        frame = _sweep(doc, "c", range(1, 51))
        np.testing.assert_allclose(frame["rev_random"], 0.05, atol=1e-12)
        newest = frame["rev_newest"].to_numpy()
        low = int(np.argmin(newest))
        assert 0 < low < len(newest) - 1
        assert newest[1] < newest[0]
        assert newest[-1] > newest[0]
        assert (newest < 0.05).all()


class TestTimeVaryingPrior:
    """Test class for a prior that learns from the review pool"""

    def test_gap_closes(self, data_dir):
        """Test an early Newest-First shortfall that fades as the prior sharpens"""
        doc = load_document(data_dir / "time_varying_prior.json")
        base = replace(
            parse_simulation(doc, replications=64), variant=TimeVaryingPrior(0.1)
        )
        paths = _trajectories(base)
        early = paths["random_iid"][:200].mean() - paths["newest"][:200].mean()
        assert early > 0.01
        for kind in ("random_iid", "random_finite_pool"):
            late = paths[kind][-200:].mean() - paths["newest"][-200:].mean()
            if not abs(late) < early / 2:
                pytest.fail(f"[FAIL] {kind}: late gap {late:.4f} vs early {early:.4f}")

    def test_slow_learning_gap_closes(self, data_dir):
        """Test gamma = 0.01 at mu = 0.1: a gap near round 1000 that halves later"""
        doc = load_document(data_dir / "time_varying_prior.json")
        paths = _trajectories(parse_simulation(doc))
        newest = paths["newest"]
        for kind in ("random_iid", "random_finite_pool"):
            early = paths[kind][900:1000].mean() - newest[900:1000].mean()
            late = paths[kind][-1000:].mean() - newest[-1000:].mean()
            if not (early > 0.01 and abs(late) < early / 2):
                pytest.fail(
                    f"[FAIL] {kind}: early gap {early:.4f}, late gap {late:.4f}"
                )


class TestIncreasingQuality:
    """Test class for window orderings while quality rises"""

    @pytest.mark.parametrize("price", [0.75, 1.0])
    def test_intermediate_window_wins(self, data_dir, price):
        """Test that neither w = c nor the whole pool is the best window"""
        doc = with_simulation_overrides(
            load_document(data_dir / "increasing_quality.json"), replications=100
        )
        doc["price"] = price
        frame = _sweep(doc, "w", [2, 5, 20, 1000])
        revenue = frame["rev_window"].to_numpy()
        best = int(np.argmax(revenue))
        assert 0 < best < len(revenue) - 1
        assert revenue[1] > revenue[0]

    @pytest.mark.parametrize("price,sign", [(0.75, 1), (1.0, -1)])
    def test_newest_against_whole_pool(self, data_dir, price, sign):
        """Test that the newest reviews win at p = 0.75 and lose at p = 1"""
        doc = load_document(data_dir / "increasing_quality.json")
        doc["price"] = price
        frame = _sweep(doc, "w", [2, 1000])
        revenue = frame["rev_window"].to_numpy()
        noise = frame["rev_window_stderr"].sum()
        gap = sign * (revenue[0] - revenue[1])
        if not gap > 3.0 * noise:
            pytest.fail(
                f"[FAIL] p={price}: w=2 {revenue[0]:.4f} vs w=1000 "
                f"{revenue[1]:.4f} (3 stderr {3.0 * noise:.2e})"
            )


class TestCoarseRatings:
    """Test class for reviews that carry the reviewer's own taste"""

    @pytest.fixture(scope="class")
    def coarse_doc(self, data_dir):
        """Fixture to provide the coarse-ratings document at test scale"""
        return with_simulation_overrides(
            load_document(data_dir / "coarse_ratings.json"),
            rounds=20_000,
            replications=16,
            burn_in=2_000,
        )

    def test_newest_below_random(self, coarse_doc):
        """Test that Newest First earns less than Random at low, mid and high prices"""
        frame = _sweep(coarse_doc, "price", [0.5, 1.0, 2.0])
        for _, row in frame.iterrows():
            noise = row["coarse_newest_stderr"] + row["coarse_random_stderr"]
            if not row["coarse_newest"] < row["coarse_random"]:
                pytest.fail(
                    f"[FAIL] p={row['price']}: newest {row['coarse_newest']:.4f} "
                    f"vs random {row['coarse_random']:.4f} (noise {noise:.2e})"
                )

    def test_newest_below_observed_quality(self, coarse_doc):
        """Test that taste-laden reviews cost Newest First revenue for p in (0, 1)"""
        frame = _sweep(coarse_doc, "price", [0.3, 0.6, 0.9])
        for _, row in frame.iterrows():
            margin = 3.0 * row["coarse_newest_stderr"]
            if not row["coarse_newest"] + margin < row["baseline_newest"]:
                pytest.fail(
                    f"[FAIL] p={row['price']}: coarse {row['coarse_newest']:.4f} "
                    f"vs observed-quality {row['baseline_newest']:.4f}"
                )


class TestPricingClasses:
    """Test class for the CoNF under static and dynamic pricing"""

    def test_dynamic_pricing_closes_gap(self, data_dir):
        """Test chi_dynamic < 1.1 < chi_static for a weak prior and narrow tastes"""
        doc = load_document(data_dir / "prior_strength.json")
        frame = _sweep(doc, "epsilon", [0.02, 0.05])
        assert (frame["chi_dynamic"] < 1.1).all()
        assert (frame["chi_static"] > 1.1).all()

    def test_static_gap_grows(self):
        """Test that the static-class CoNF grows like 1 / theta_bar over four decades"""
        x = 3.0 - np.sqrt(3.0)
        slope = 0.475 * (3.0 - x) / (2.0 * x * (2.0 - x))
        chis = []
        for theta_bar in (0.1, 0.01, 0.001, 0.0001):
            inst = static_gap_instance(theta_bar)
            chi = conf_class(inst, "static").chi
            bound = static_bound(inst)
            if not chi >= bound:
                pytest.fail(f"[FAIL] theta_bar={theta_bar}: chi {chi} below {bound}")
            assert chi * theta_bar == pytest.approx(slope, rel=1e-4)
            chis.append(chi)
        for smaller, larger in zip(chis, chis[1:]):
            assert larger > 5.0 * smaller


class TestThroughput:
    """Test class for long runs of the stationary kernels"""

    @pytest.mark.parametrize("ordering", ["newest", "random_iid"])
    def test_million_rounds(self, worked_example, ordering):
        """Test 10^6 rounds over 8 replications in under five seconds"""
        config = SimConfig(
            worked_example,
            SimOrdering(ordering),
            Static(1.0),
            rounds=1_000_000,
            replications=8,
            seed=11,
        )
        start = time.perf_counter()
        result = run(config)
        elapsed = time.perf_counter() - start
        if elapsed > 5.0:
            pytest.fail(f"[FAIL] {ordering}: {elapsed:.2f}s for 8 x 10^6 rounds")
        if ordering == "newest":
            exact = rev_newest_static(worked_example, 1.0)
        else:
            exact = rev_random_static(worked_example, 1.0)
        assert abs(result.avg_revenue_per_round - exact) <= GATE * result.stderr


if __name__ == "__main__":
    pytest.main([__file__])
