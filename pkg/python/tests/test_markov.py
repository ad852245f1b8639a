#!/usr/bin/env python3
"""
Pytest unit tests for explicit chains, stationary solves and lazy modifications.
"""

import numpy as np
import pytest

from conflab.errors import (
    AbsorbingState,
    InvalidParams,
    InvalidStay,
    NotErgodic,
    WindowTooLarge,
)
from conflab.markov import (
    NONSTATIONARY_STATES,
    FiniteChain,
    build_iid_chain,
    build_newest_chain,
    build_nonstationary_chain,
    build_window_chain,
    check_ergodic,
    export_csv,
    lazify,
    state_purchase_probs,
    stationary_solve,
    window_purchase_probs,
)
from conflab.model import BetaMean, CountTable, Static


class TestFiniteChain:
    """Test class for chain construction checks"""

    def test_rows_must_sum_to_one(self):
        """Test that non-stochastic rows are rejected"""
        with pytest.raises(InvalidParams):
            FiniteChain.from_dense(["a", "b"], [[0.5, 0.4], [0.0, 1.0]])

    def test_negative_entries_rejected(self):
        """Test that negative probabilities are rejected"""
        with pytest.raises(InvalidParams):
            FiniteChain.from_dense(["a", "b"], [[1.5, -0.5], [0.5, 0.5]])

    def test_reducible_chain(self):
        """Test that a chain with two closed classes is not ergodic"""
        chain = FiniteChain.from_dense(["a", "b"], np.eye(2))
        with pytest.raises(NotErgodic):
            check_ergodic(chain)

    def test_periodic_chain(self):
        """Test that a two-cycle is rejected as periodic"""
        chain = FiniteChain.from_dense(["a", "b"], [[0.0, 1.0], [1.0, 0.0]])
        with pytest.raises(NotErgodic, match="period 2"):
            stationary_solve(chain)

    def test_two_state_solve(self):
        """Test pi = (b, a) / (a + b) for the two-state chain"""
        a, b = 0.3, 0.1
        chain = FiniteChain.from_dense(["x", "y"], [[1 - a, a], [b, 1 - b]])
        pi = stationary_solve(chain)
        assert pi["x"] == pytest.approx(b / (a + b), abs=1e-12)
        assert pi.residual(chain) < 1e-12


class TestNewestChain:
    """Test class for the Newest-First review chain"""

    def test_worked_example_stationary(self, worked_example):
        """Test the (2/3, 1/3) steady state at price 1"""
        pi = stationary_solve(build_newest_chain(worked_example, Static(1.0)))
        assert pi["0"] == pytest.approx(2.0 / 3.0, abs=1e-12)
        assert pi["1"] == pytest.approx(1.0 / 3.0, abs=1e-12)

    def test_two_review_chain(self, worked_example):
        """Test the c = 2 counts law (3/7, 3/7, 1/7)"""
        inst = worked_example.with_(c=2)
        pi = stationary_solve(build_newest_chain(inst, Static(1.0))).as_dict()
        assert pi["00"] == pytest.approx(3.0 / 7.0, abs=1e-12)
        assert pi["01"] + pi["10"] == pytest.approx(3.0 / 7.0, abs=1e-12)
        assert pi["11"] == pytest.approx(1.0 / 7.0, abs=1e-12)

    def test_absorbing_state_reported(self, worked_example):
        """Test that a price that never sells after a bad review is refused"""
        with pytest.raises(AbsorbingState) as info:
            build_newest_chain(worked_example, Static(1.5))
        assert "0" in info.value.states

    def test_dynamic_policy_chain(self, worked_example):
        """Test that the review-offsetting prices equalise purchase odds"""
        chain = build_newest_chain(worked_example, CountTable((7 / 12, 11 / 12)))
        dense = chain.dense()
        # a sale happens w.p. 3/4 and writes a positive rating w.p. 1/2
        assert dense[chain.index("0"), chain.index("1")] == pytest.approx(0.375)
        assert dense[chain.index("1"), chain.index("0")] == pytest.approx(0.375)

    def test_newest_is_lazy_iid_chain(self, worked_example):
        """Test that Newest First is the lazy form of the always-selling chain"""
        inst = worked_example.with_(c=3)
        newest = build_newest_chain(inst, Static(1.0))
        q = state_purchase_probs(inst, Static(1.0))
        lazy = lazify(build_iid_chain(3, inst.mu), q)
        np.testing.assert_allclose(lazy.chain.dense(), newest.dense(), atol=1e-15)
        solved = stationary_solve(newest)
        np.testing.assert_allclose(lazy.stationary.probs, solved.probs, atol=1e-12)

    def test_sparse_solve_path(self):
        """Test the sparse solver above the dense limit against the product law"""
        from conflab.markov import DENSE_SOLVE_LIMIT

        c = 12
        assert 2**c > DENSE_SOLVE_LIMIT
        pi = stationary_solve(build_iid_chain(c, 0.3))
        counts = np.array([label.count("1") for label in pi.states])
        expected = 0.3**counts * 0.7 ** (c - counts)
        np.testing.assert_allclose(pi.probs, expected, atol=1e-12)


class TestLazyModification:
    """Test class for lazify and its closed-form stationary law"""

    def test_random_chains(self, rng):
        """Test kappa pi / f against a direct solve on random small chains"""
        for _ in range(200):
            n = int(rng.integers(2, 9))
            matrix = rng.random((n, n)) + 0.01
            matrix /= matrix.sum(axis=1, keepdims=True)
            chain = FiniteChain.from_dense([str(i) for i in range(n)], matrix)
            lazy = lazify(chain, rng.uniform(0.01, 1.0, n))
            solved = stationary_solve(lazy.chain)
            np.testing.assert_allclose(lazy.stationary.probs, solved.probs, atol=1e-9)

    def test_mapping_stay(self):
        """Test that move probabilities can be given per label"""
        chain = FiniteChain.from_dense(["a", "b"], [[0.5, 0.5], [0.5, 0.5]])
        lazy = lazify(chain, {"a": 1.0, "b": 0.5})
        assert lazy.stationary["a"] == pytest.approx(1.0 / 3.0)

    @pytest.mark.parametrize("stay", [[0.0, 1.0], [1.2, 0.5], [0.5]])
    def test_invalid_stay(self, stay):
        """Test that move probabilities outside (0, 1] are rejected"""
        chain = FiniteChain.from_dense(["a", "b"], [[0.5, 0.5], [0.5, 0.5]])
        with pytest.raises(InvalidStay):
            lazify(chain, stay)


class TestWindowChain:
    """Test class for c-of-w random display chains"""

    def test_window_equal_to_c_is_newest(self, worked_example):
        """Test that w = c reproduces the Newest-First chain"""
        window = build_window_chain(worked_example, 1, 1.0)
        newest = build_newest_chain(worked_example, Static(1.0))
        np.testing.assert_allclose(window.dense(), newest.dense())

    def test_window_two_revenue(self, worked_example):
        """Test the w = 2 revenue 1 / 2.125 from the chain"""
        chain = build_window_chain(worked_example, 2, 1.0)
        pi = stationary_solve(chain)
        by_count = window_purchase_probs(worked_example, 2, 1.0)
        q = by_count[[label.count("1") for label in chain.states]]
        assert float(pi.probs @ q) == pytest.approx(1.0 / 2.125, abs=1e-12)

    def test_subset_average(self, worked_example):
        """Test the subset-averaged purchase odds for c = 1"""
        np.testing.assert_allclose(
            window_purchase_probs(worked_example, 2, 1.0), [1 / 3, 0.5, 2 / 3]
        )

    def test_window_limits(self, worked_example):
        """Test the window size checks"""
        with pytest.raises(InvalidParams):
            build_window_chain(worked_example.with_(c=2), 1, 1.0)
        with pytest.raises(WindowTooLarge):
            build_window_chain(worked_example, 17, 1.0)


class TestNonstationaryChain:
    """Test class for the switching-quality chain"""

    def test_state_order(self, switching):
        """Test the (newest rating, quality) labels"""
        chain = switching.chain()
        assert chain.states == NONSTATIONARY_STATES

    def test_quality_marginal(self, switching):
        """Test that each quality level holds half the time"""
        pi = stationary_solve(switching.chain())
        assert pi["0H"] + pi["1H"] == pytest.approx(0.5, abs=1e-12)

    def test_worked_value(self, switching):
        """Test pi(0, H) = 0.4921875 / 1.46875"""
        pi = stationary_solve(switching.chain())
        assert pi["0H"] == pytest.approx(0.4921875 / 1.46875, abs=1e-12)

    def test_rejects_wide_displays(self, switching):
        """Test that only one displayed review is supported"""
        with pytest.raises(InvalidParams):
            build_nonstationary_chain(
                0.25, 0.75, 0.5, 1.0, switching.base.with_(c=2, estimator=BetaMean())
            )


class TestExport:
    """Test class for CSV dumps"""

    def test_export_csv(self, worked_example, tmp_path):
        """Test that the dump has a header of labels and one row per state"""
        import pandas as pd

        chain = build_newest_chain(worked_example, Static(1.0))
        path = export_csv(chain, tmp_path / "chain.csv")
        frame = pd.read_csv(path, index_col="from", dtype={"from": str})
        assert list(frame.columns) == ["0", "1"]
        np.testing.assert_allclose(frame.to_numpy(), chain.dense())
        assert b"\r\n" not in path.read_bytes()


if __name__ == "__main__":
    pytest.main([__file__])
