"""Monte Carlo optimal stopping with bagged CART stopping rules.

Path ensembles are simulated once, a family of {0,1}-leaf decision trees is
fitted by backward recursion over the exercise dates, and the resulting
first-hit stopping rule is evaluated on held-out ensembles to produce lower
bounds on the optimal expected reward.
"""

from treestop.ensemble import GbmSpec, PathEnsemble, augment_barrier, generate_gbm
from treestop.reward import RewardSpec, feature_dim, features, reward
from treestop.cart import (
    CartTree,
    DeltaSamples,
    GrowConfig,
    Leaf,
    Split,
    delta_split,
    grow,
    predict,
    prototype_split,
    removal,
)
from treestop.stopper import BaggedStopper, StopResult, TrainConfig, apply, train
from treestop.valuation import (
    BoundaryScatter,
    ValuationReport,
    european_value,
    extract_boundary,
    ls_value,
    oracle_bruteforce,
    oracle_enumerate,
    v_max,
    value_of_rule,
)

__all__ = [
    "GbmSpec",
    "PathEnsemble",
    "generate_gbm",
    "augment_barrier",
    "RewardSpec",
    "reward",
    "features",
    "feature_dim",
    "DeltaSamples",
    "CartTree",
    "GrowConfig",
    "Split",
    "Leaf",
    "removal",
    "delta_split",
    "prototype_split",
    "grow",
    "predict",
    "TrainConfig",
    "BaggedStopper",
    "StopResult",
    "train",
    "apply",
    "ValuationReport",
    "BoundaryScatter",
    "value_of_rule",
    "v_max",
    "ls_value",
    "oracle_enumerate",
    "oracle_bruteforce",
    "extract_boundary",
    "european_value",
]

__version__ = "0.1.0"
