#!/usr/bin/env python3
"""
Pytest unit tests for valuation laws and single-customer optimal prices.
"""

import math

import numpy as np
import pytest

from conflab.distributions import (
    Bernoulli,
    Exponential,
    Normal,
    Uniform,
    myerson,
    sample,
    support,
    survival,
)
from conflab.errors import InvalidInstance, NoPositiveRevenue


class TestSurvival:
    """Test class for P[Theta >= x] on each kind"""

    def test_uniform_survival(self):
        """Test the uniform survival function inside and outside the support"""
        dist = Uniform(-1.0, 1.0)
        assert survival(dist, -2.0) == 1.0
        assert survival(dist, 0.0) == pytest.approx(0.5)
        assert survival(dist, 0.5) == pytest.approx(0.25)
        assert survival(dist, 3.0) == 0.0

    def test_survival_accepts_arrays(self):
        """Test that survival broadcasts over arrays"""
        values = Uniform(0.0, 2.0).survival(np.array([0.0, 1.0, 2.0]))
        np.testing.assert_allclose(values, [1.0, 0.5, 0.0])

    def test_exponential_survival(self):
        """Test that the exponential law has all its mass on [0, inf)"""
        dist = Exponential(2.0)
        assert dist.survival(-1.0) == 1.0
        assert dist.survival(0.5) == pytest.approx(math.exp(-1.0))
        assert dist.p_nonnegative() == 1.0

    def test_normal_survival(self):
        """Test the normal survival at the mean and its symmetry"""
        dist = Normal(0.0, 1.0)
        assert dist.survival(0.0) == pytest.approx(0.5)
        assert dist.survival(1.0) + dist.survival(-1.0) == pytest.approx(1.0)

    def test_bernoulli_survival_counts_atoms(self):
        """Test that survival includes an atom sitting exactly at x"""
        dist = Bernoulli(0.3, on_value=2.0, off_value=-1.0)
        assert dist.survival(2.0) == pytest.approx(0.3)
        assert dist.survival(-1.0) == pytest.approx(1.0)
        assert dist.survival(0.0) == pytest.approx(0.3)
        assert support(dist) == (-1.0, 2.0)

    def test_bounded_flags(self):
        """Test is_bounded for bounded and unbounded kinds"""
        assert Uniform(0.0, 1.0).is_bounded()
        assert Bernoulli(0.5).is_bounded()
        assert not Exponential(1.0).is_bounded()
        assert not Normal().is_bounded()


class TestValidation:
    """Test class for parameter checks"""

    @pytest.mark.parametrize(
        "factory",
        [
            lambda: Uniform(1.0, 1.0),
            lambda: Uniform(0.0, math.inf),
            lambda: Exponential(0.0),
            lambda: Normal(0.0, -1.0),
            lambda: Bernoulli(1.5),
        ],
    )
    def test_invalid_parameters_rejected(self, factory):
        """Test that invalid parameters raise InvalidInstance"""
        with pytest.raises(InvalidInstance):
            factory()

    def test_records_carry_kind(self):
        """Test that to_record tags each law with its kind"""
        expected = {"kind": "uniform", "lo": 0.0, "hi": 1.0}
        assert Uniform(0.0, 1.0).to_record() == expected
        assert Exponential(3.0).to_record() == {"kind": "exponential", "rate": 3.0}
        assert Normal(1.0, 2.0).to_record()["kind"] == "normal"
        assert Bernoulli(0.5).to_record()["kind"] == "bernoulli"


class TestSampling:
    """Test class for seeded sampling"""

    def test_sample_shapes(self, rng):
        """Test scalar and vector draws"""
        assert np.ndim(sample(Uniform(), rng)) == 0
        assert sample(Exponential(1.0), rng, 5).shape == (5,)

    def test_sample_mean(self, rng):
        """Test that sample means land near the law's mean"""
        draws = sample(Uniform(-1.0, 3.0), rng, 100_000)
        assert draws.mean() == pytest.approx(1.0, abs=0.02)
        assert draws.min() >= -1.0 and draws.max() <= 3.0

    def test_bernoulli_sample_values(self, rng):
        """Test that Bernoulli draws only take the two atoms"""
        draws = Bernoulli(0.25, on_value=5.0, off_value=1.0).sample(rng, 10_000)
        assert set(np.unique(draws)) <= {1.0, 5.0}
        assert (draws == 5.0).mean() == pytest.approx(0.25, abs=0.02)


class TestMyerson:
    """Test class for the optimal posted price of one customer"""

    @pytest.mark.parametrize("shift", [0.0, 1.0 / 3.0, 0.5, 2.0 / 3.0])
    def test_uniform_unit_interval(self, shift):
        """Test the U[0, 1] optimum (1 + s) / 2 with revenue ((1 + s) / 2)^2"""
        result = myerson(Uniform(0.0, 1.0), shift)
        assert result.price == pytest.approx((1.0 + shift) / 2.0)
        assert result.revenue == pytest.approx(((1.0 + shift) / 2.0) ** 2)

    def test_uniform_lower_clamp(self):
        """Test that a large shift makes the lowest sure-sale price optimal"""
        result = myerson(Uniform(0.0, 0.216), 0.99)
        assert result.price == pytest.approx(0.99)
        assert result.quantile == pytest.approx(1.0)

    def test_uniform_symmetric_support(self):
        """Test the clamp on U[-eps, eps]"""
        result = myerson(Uniform(-0.05, 0.05), 0.5)
        assert result.price == pytest.approx(0.45)
        assert result.revenue == pytest.approx(0.45)

    @pytest.mark.parametrize(
        "rate,shift", [(1.0, 0.0), (1.0, 0.5), (2.0, 1.0), (0.5, 0.2)]
    )
    def test_exponential_matches_analytic(self, rate, shift):
        """Test the numeric optimum against p* = max(s, 1 / rate)"""
        result = myerson(Exponential(rate), shift)
        expected = max(shift, 1.0 / rate)
        assert result.price == pytest.approx(expected, abs=1e-6)
        analytic = expected * math.exp(-rate * max(expected - shift, 0.0))
        assert result.revenue == pytest.approx(analytic, rel=1e-9)

    def test_normal_beats_grid(self):
        """Test that the normal optimum is at least as good as a fine grid"""
        dist = Normal(0.0, 1.0)
        result = myerson(dist, 0.5)
        grid = np.linspace(0.0, 6.0, 60_001)
        best = float(np.max(grid * dist.survival(grid - 0.5)))
        assert result.revenue >= best - 1e-9

    def test_bernoulli_compares_atoms(self):
        """Test that Bernoulli laws pick the better of the atom prices"""
        dist = Bernoulli(0.3, on_value=2.0, off_value=0.0)
        result = myerson(dist, 1.0)
        # price 3 earns 0.9, price 1 earns 1.0
        assert result.price == pytest.approx(1.0)
        assert result.revenue == pytest.approx(1.0)

    def test_no_positive_revenue(self):
        """Test that a support below zero raises NoPositiveRevenue"""
        with pytest.raises(NoPositiveRevenue):
            myerson(Uniform(-2.0, -1.0), 0.5)

    def test_random_laws_beat_grid(self, rng):
        """Test seeded laws and shifts against a 200001-point price grid"""
        for trial in range(30):
            kind = trial % 3
            if kind == 0:
                lo = float(rng.uniform(-1.0, 0.5))
                dist = Uniform(lo, lo + float(rng.uniform(1.2, 2.0)))
            elif kind == 1:
                dist = Exponential(float(rng.uniform(0.3, 4.0)))
            else:
                mean, sd = rng.uniform(-0.5, 0.5), rng.uniform(0.2, 1.5)
                dist = Normal(float(mean), float(sd))
            shift = float(rng.uniform(0.0, 2.0))
            result = myerson(dist, shift)
            grid = np.linspace(0.0, dist.upper_quantile() + shift, 200_001)
            best = float(np.max(grid * dist.survival(grid - shift)))
            if result.revenue < best - 1e-9:
                pytest.fail(
                    f"[FAIL] {dist.to_record()} shift {shift}: "
                    f"{result.revenue} below grid {best}"
                )
            expected = result.price * dist.survival(result.price - shift)
            assert result.revenue == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize(
        "dist", [Uniform(-0.5, 1.0), Exponential(1.5), Normal(0.0, 0.5)]
    )
    def test_revenue_rises_with_shift(self, dist):
        """Test that revenue is non-decreasing in the shift and beats pricing at it"""
        shifts = np.linspace(0.0, 3.0, 31)
        revenues = np.array([myerson(dist, float(s)).revenue for s in shifts])
        assert np.all(np.diff(revenues) >= -1e-12)
        floor = shifts * dist.p_nonnegative()
        assert np.all(revenues >= floor - 1e-12)

    def test_non_finite_shift(self):
        """Test that a non-finite shift is rejected"""
        with pytest.raises(InvalidInstance):
            myerson(Uniform(), math.nan)


if __name__ == "__main__":
    pytest.main([__file__])
