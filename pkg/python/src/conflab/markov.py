"""Explicit finite Markov chains over review states and their steady states.

These chains are built independently of the closed forms in
:mod:`conflab.analytics` and serve as the exact oracle for them. Transition
matrices are kept sparse; stationary distributions come from a direct
linear solve.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from functools import cached_property, reduce
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, shortest_path
from scipy.sparse.linalg import spsolve

from .errors import (
    AbsorbingState,
    InvalidParams,
    InvalidStay,
    NotErgodic,
    WindowTooLarge,
)
from .model import (
    ABSORBING_TOL,
    MAX_ENUMERATED_C,
    Instance,
    PricingPolicy,
    StateTable,
    purchase_probs,
)

logger = logging.getLogger(__name__)

ROW_SUM_TOL = 1e-12

# Above this many states the solve switches from dense LU to sparse LU.
DENSE_SOLVE_LIMIT = 2048

MAX_WINDOW = 16


@dataclass(frozen=True, eq=False)
class FiniteChain:
    """Row-stochastic chain; row ``i`` holds the moves out of ``states[i]``."""

    states: tuple[str, ...]
    transition: sp.csr_matrix

    def __post_init__(self):
        n = len(self.states)
        matrix = sp.csr_matrix(self.transition, dtype=float)
        if matrix.shape != (n, n):
            raise InvalidParams(
                f"transition shape {matrix.shape} does not match {n} states"
            )
        matrix.sum_duplicates()
        matrix.eliminate_zeros()
        data = matrix.data
        if matrix.nnz and (data.min() < 0 or data.max() > 1 + ROW_SUM_TOL):
            raise InvalidParams("transition entries must lie in [0, 1]")
        row_sums = np.asarray(matrix.sum(axis=1)).ravel()
        worst = float(np.max(np.abs(row_sums - 1.0))) if n else 0.0
        if worst > ROW_SUM_TOL:
            raise InvalidParams(
                f"transition rows must sum to 1 (max deviation {worst:.3g})"
            )
        object.__setattr__(self, "transition", matrix)
        object.__setattr__(self, "states", tuple(self.states))

    @classmethod
    def from_dense(cls, states: Sequence[str], matrix) -> "FiniteChain":
        return cls(tuple(states), sp.csr_matrix(np.asarray(matrix, dtype=float)))

    @property
    def size(self) -> int:
        return len(self.states)

    def dense(self) -> np.ndarray:
        return self.transition.toarray()

    def index(self, label: str) -> int:
        return self.states.index(label)


@dataclass(frozen=True, eq=False)
class StationaryDist:
    states: tuple[str, ...]
    probs: np.ndarray

    def __getitem__(self, label: str) -> float:
        return float(self.probs[self.states.index(label)])

    def as_dict(self) -> dict[str, float]:
        return {s: float(p) for s, p in zip(self.states, self.probs)}

    def residual(self, chain: FiniteChain) -> float:
        """max |pi P - pi|."""
        return float(np.max(np.abs(chain.transition.T @ self.probs - self.probs)))


def check_ergodic(chain: FiniteChain) -> None:
    """Raise NotErgodic unless the chain is irreducible and aperiodic.

    The period is the gcd of ``d(u) + 1 - d(v)`` over all edges ``u -> v``,
    with ``d`` the BFS depth from state 0.
    """
    matrix = chain.transition
    n_components, _ = connected_components(matrix, directed=True, connection="strong")
    if n_components != 1:
        raise NotErgodic(f"chain over {chain.size} states has {n_components} classes")

    depth = shortest_path(matrix, directed=True, unweighted=True, indices=0)
    coo = matrix.tocoo()
    gaps = np.abs(depth[coo.row] + 1 - depth[coo.col]).astype(np.int64)
    period = int(reduce(math.gcd, gaps.tolist(), 0))
    if period != 1:
        raise NotErgodic(f"chain over {chain.size} states has period {period}")


def stationary_solve(chain: FiniteChain) -> StationaryDist:
    """Unique stationary distribution of an ergodic chain."""
    check_ergodic(chain)
    n = chain.size
    if n <= DENSE_SOLVE_LIMIT:
        system = chain.dense().T - np.eye(n)
        system[-1, :] = 1.0
        rhs = np.zeros(n)
        rhs[-1] = 1.0
        probs = scipy.linalg.solve(system, rhs)
    else:
        # Pin pi[0] = 1 and solve the balance equations of the other states.
        generator = (chain.transition - sp.identity(n, format="csr")).tocsc()
        block = generator[1:, 1:].T.tocsc()
        rhs = -np.asarray(generator[0, 1:].todense()).ravel()
        rest = spsolve(block, rhs)
        probs = np.concatenate(([1.0], rest))
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    logger.info("Solved stationary distribution over %d states", n)
    return StationaryDist(chain.states, probs)


@dataclass(frozen=True, eq=False)
class LazyModification:
    """Chain that moves like ``base`` with probability f(s) and stays otherwise."""

    base: FiniteChain
    chain: FiniteChain
    stay: np.ndarray

    @cached_property
    def stationary(self) -> StationaryDist:
        """kappa * pi(s) / f(s), from the base chain's stationary law."""
        base_pi = stationary_solve(self.base).probs
        weights = base_pi / self.stay
        return StationaryDist(self.chain.states, weights / weights.sum())


def lazify(
    chain: FiniteChain, stay: Mapping[str, float] | Sequence[float] | np.ndarray
) -> LazyModification:
    if isinstance(stay, Mapping):
        f = np.array([stay[s] for s in chain.states], dtype=float)
    else:
        f = np.asarray(stay, dtype=float)
    if f.shape != (chain.size,):
        raise InvalidStay(
            f"expected {chain.size} move probabilities, got shape {f.shape}"
        )
    bad = [s for s, v in zip(chain.states, f) if not 0.0 < v <= 1.0]
    if bad:
        raise InvalidStay(
            f"move probabilities must lie in (0, 1]; offending states {bad}"
        )

    lazy = sp.diags(f) @ chain.transition + sp.diags(1.0 - f)
    return LazyModification(chain, FiniteChain(chain.states, sp.csr_matrix(lazy)), f)


# ---------------------------------------------------------------------------
# Review-state chains
# ---------------------------------------------------------------------------


def _labels(width: int) -> tuple[str, ...]:
    return tuple(format(i, f"0{width}b") for i in range(2**width))


def _popcounts(width: int) -> np.ndarray:
    index = np.arange(2**width)
    return sum((index >> k) & 1 for k in range(width))


def _shift_chain(width: int, mu: float, q: np.ndarray) -> FiniteChain:
    """Newest-review shift dynamics over {0,1}^width.

    State index ``i`` has its most recent rating in the top bit; a sale
    shifts every rating one slot down and writes a Bern(mu) rating on top.
    """
    n = 2**width
    absorbing = np.flatnonzero(q <= ABSORBING_TOL)
    if absorbing.size:
        labels = _labels(width)
        raise AbsorbingState(
            f"{absorbing.size} review states never see a purchase",
            [labels[i] for i in absorbing],
        )
    index = np.arange(n)
    shifted = index >> 1
    top = 1 << (width - 1)
    rows = np.concatenate([index, index, index])
    cols = np.concatenate([index, shifted | top, shifted])
    data = np.concatenate([1.0 - q, mu * q, (1.0 - mu) * q])
    matrix = sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()
    return FiniteChain(_labels(width), matrix)


def state_purchase_probs(inst: Instance, policy: PricingPolicy) -> np.ndarray:
    """q(z) for every z in {0,1}^c, in state-index order."""
    c = inst.c
    if c > MAX_ENUMERATED_C:
        raise InvalidParams(
            f"state enumeration is limited to c <= {MAX_ENUMERATED_C}, got {c}"
        )
    policy.check(c)
    counts = _popcounts(c)
    h = inst.h_values()[counts]
    if isinstance(policy, StateTable):
        prices = np.asarray(policy.prices, dtype=float)
    else:
        prices = policy.count_prices(c)[counts]
    return np.asarray(inst.dist.survival(prices - h), dtype=float)


def build_iid_chain(width: int, mu: float) -> FiniteChain:
    """Shift chain that sells every round, so its states are i.i.d. Bern(mu) ratings.

    Newest First is the lazy modification of this chain with move
    probabilities q(z).
    """
    return _shift_chain(width, mu, np.ones(2**width))


def build_newest_chain(inst: Instance, policy: PricingPolicy) -> FiniteChain:
    chain = _shift_chain(inst.c, inst.mu, state_purchase_probs(inst, policy))
    logger.debug("Built newest chain: c=%d, %d states", inst.c, chain.size)
    return chain


def window_purchase_probs(inst: Instance, w: int, price: float) -> np.ndarray:
    """Subset-averaged purchase probability per count of positives in the window.

    Entry ``k`` averages q over all c-subsets of a window holding ``k``
    positive ratings.
    """
    c = inst.c
    q = purchase_probs(inst, price)
    out = np.empty(w + 1)
    for k in range(w + 1):
        window = [1] * k + [0] * (w - k)
        total = 0.0
        count = 0
        for subset in itertools.combinations(range(w), c):
            total += q[sum(window[i] for i in subset)]
            count += 1
        out[k] = total / count
    return out


def build_window_chain(inst: Instance, w: int, price: float) -> FiniteChain:
    """Chain of the w most recent ratings when c of them are shown at random."""
    if w < inst.c:
        raise InvalidParams(f"window w={w} must be at least c={inst.c}")
    if w > MAX_WINDOW:
        raise WindowTooLarge(f"exact window chains need w <= {MAX_WINDOW}, got {w}")
    q_by_count = window_purchase_probs(inst, w, price)
    chain = _shift_chain(w, inst.mu, q_by_count[_popcounts(w)])
    logger.debug("Built window chain: c=%d, w=%d, %d states", inst.c, w, chain.size)
    return chain


NONSTATIONARY_STATES = ("0L", "1L", "0H", "1H")


def build_nonstationary_chain(
    mu_L: float, mu_H: float, xi: float, price: float, inst_base: Instance
) -> FiniteChain:
    """Chain over (newest rating, current quality) with switching quality.

    Each round sells with probability q_r for newest rating r; a sale writes
    a rating drawn from the quality at the start of the round. Independently
    the quality jumps to the other level with probability xi / 2.
    """
    if inst_base.c != 1:
        raise InvalidParams(f"non-stationary chain needs c=1, got c={inst_base.c}")
    if not 0.0 < mu_L < mu_H < 1.0:
        raise InvalidParams(f"need 0 < mu_L < mu_H < 1, got mu_L={mu_L}, mu_H={mu_H}")
    if not 0.0 < xi <= 1.0:
        raise InvalidParams(f"xi must lie in (0, 1], got {xi}")
    q = purchase_probs(inst_base, price)
    if q[0] <= ABSORBING_TOL:
        raise InvalidParams(f"price {price} never sells after a negative review")

    switch = xi / 2.0
    quality = {"L": mu_L, "H": mu_H}
    matrix = np.zeros((4, 4))
    for i, (r, level) in enumerate(NONSTATIONARY_STATES):
        mu = quality[level]
        review = {
            "1": q[int(r)] * mu + (1.0 - q[int(r)]) * (r == "1"),
            "0": q[int(r)] * (1.0 - mu) + (1.0 - q[int(r)]) * (r == "0"),
        }
        for j, (r_next, level_next) in enumerate(NONSTATIONARY_STATES):
            move = switch if level_next != level else 1.0 - switch
            matrix[i, j] = review[r_next] * move
    return FiniteChain.from_dense(NONSTATIONARY_STATES, matrix)


def export_csv(chain: FiniteChain, path: str | Path) -> Path:
    """Dump the dense transition matrix, one row per from-state."""
    path = Path(path)
    labels = list(chain.states)
    frame = pd.DataFrame(chain.dense(), index=labels, columns=labels)
    frame.to_csv(
        path, index_label="from", float_format="%.12g", lineterminator="\n"
    )
    logger.info("Wrote %dx%d transition matrix to %s", chain.size, chain.size, path)
    return path
