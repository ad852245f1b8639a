"""conflab: revenue effects of review ordering and pricing

Closed-form steady states, Markov-chain oracles, optimal static and dynamic
prices, and a seeded simulator for markets where customers read a few
reviews before buying. The headline quantity is the Cost of Newest First,
the ratio of long-run revenue when reviews are shown at random to the
revenue when the newest reviews are shown first.
"""

import logging

__version__ = "0.1.0"

from .analytics import (
    ConfReport,
    NonstationarySteadyState,
    conf_static,
    ns_steady,
    rev_newest_dynamic,
    rev_newest_static,
    rev_random_dynamic,
    rev_random_static,
    stationary_newest_counts,
    window_revenue,
)
from .distributions import Bernoulli, Exponential, Normal, Uniform, myerson
from .errors import ConfLabError
from .model import (
    BetaMean,
    BetaQuantile,
    CountTable,
    Instance,
    Ordering,
    StateTable,
    Static,
    Table,
)
from .pricing import (
    conf_class,
    optimal_dynamic_newest,
    optimal_dynamic_random,
    optimal_static,
)
from .simulator import SimConfig, SimOrdering, SimResult, run

logging.getLogger(__name__).addHandler(logging.NullHandler())

__all__ = [
    "Bernoulli",
    "BetaMean",
    "BetaQuantile",
    "ConfLabError",
    "ConfReport",
    "CountTable",
    "Exponential",
    "Instance",
    "NonstationarySteadyState",
    "Normal",
    "Ordering",
    "SimConfig",
    "SimOrdering",
    "SimResult",
    "StateTable",
    "Static",
    "Table",
    "Uniform",
    "conf_class",
    "conf_static",
    "myerson",
    "ns_steady",
    "optimal_dynamic_newest",
    "optimal_dynamic_random",
    "optimal_static",
    "rev_newest_dynamic",
    "rev_newest_static",
    "rev_random_dynamic",
    "rev_random_static",
    "run",
    "stationary_newest_counts",
    "window_revenue",
]
