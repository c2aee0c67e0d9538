"""Backward recursion training and evaluation of the bagged stopping rule.

Training proceeds from the last decision step down to step zero.  At each
step every bag grows one tree on its own (feature point, increment) data; a
path's increment compares the reward at its current continuation stop against
the immediate reward.  The continuation stop of a bag's paths is maintained
with a leave-one-bag-out majority vote over the other bags' trees (the
cross-validation device), while the final composed rule votes over all bags.

The composed rule stops a path at the first step where at least half of the
bag trees vote STOP; step N stops unconditionally.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import hashlib

import numpy as np

from treestop.cart import CartTree, GrowConfig, grow, removal
from treestop.ensemble import PathEnsemble
from treestop.reward import RewardSpec, feature_dim, features, reward


@dataclass(frozen=True)
class TrainConfig:
    """Bagging and growth settings for one training run."""

    bags: int = 10
    grow: GrowConfig = field(default_factory=GrowConfig)
    feature_mode: str = "raw"
    seed_bagging: int = 0

    def __post_init__(self):
        if self.bags < 2:
            raise ValueError("need at least two bags for cross-validation")


class BaggedStopper:
    """B x N array of trees plus the majority projector.

    trees[b][n] votes STOP/CONTINUE for step n; the estimated per-step rule is
    g_n(x) = 1{ mean_b trees[b][n](features(n, x)) >= 1/2 } for n < N and the
    constant STOP at n = N.  Stopping a path means taking the first step whose
    rule fires.
    """

    def __init__(self, trees, feature_mode: str, reward_spec: RewardSpec, num_steps: int):
        self.trees = trees
        self.bags = len(trees)
        self.feature_mode = feature_mode
        self.reward_spec = reward_spec
        self.num_steps = num_steps
        if any(len(row) != num_steps for row in trees):
            raise ValueError("need one tree per bag per decision step")

    def step_votes(self, n: int, feats: np.ndarray) -> np.ndarray:
        """(K,) count of bag trees voting STOP at step n for each feature row."""
        votes = np.zeros(feats.shape[0], dtype=np.int32)
        for b in range(self.bags):
            votes += self.trees[b][n].predict(feats)
        return votes

    def step_rule(self, n: int, feats: np.ndarray) -> np.ndarray:
        """Boolean g_n over feature rows (full-bag average projected at 1/2)."""
        if n >= self.num_steps:
            return np.ones(feats.shape[0], dtype=bool)
        return self.step_votes(n, feats) * 2 >= self.bags

    def serialize(self) -> str:
        lines = [
            "stopper v1",
            f"bags {self.bags}",
            f"steps {self.num_steps}",
            f"feature_mode {self.feature_mode}",
            f"reward_hash {reward_hash(self.reward_spec)}",
        ]
        for b in range(self.bags):
            for n in range(self.num_steps):
                lines.append(f"begintree bag={b} step={n}")
                lines.append(self.trees[b][n].to_text())
                lines.append("endtree")
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str, reward_spec: RewardSpec) -> "BaggedStopper":
        # leading '#' lines are provenance comments added by the CLI
        lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
        if not lines or lines[0].strip() != "stopper v1":
            raise ValueError("not a stopper dump")
        header = {}
        i = 1
        while i < len(lines) and not lines[i].startswith("begintree"):
            key, val = lines[i].split(maxsplit=1)
            header[key] = val
            i += 1
        if header["reward_hash"] != reward_hash(reward_spec):
            raise ValueError("stopper was trained for a different reward spec")
        bags, steps = int(header["bags"]), int(header["steps"])
        trees = [[None] * steps for _ in range(bags)]
        while i < len(lines):
            head = lines[i].split()
            meta = dict(part.split("=") for part in head[1:])
            b, n = int(meta["bag"]), int(meta["step"])
            i += 1
            block = []
            while lines[i].strip() != "endtree":
                block.append(lines[i])
                i += 1
            i += 1
            trees[b][n] = CartTree.from_text("\n".join(block))
        if any(t is None for row in trees for t in row):
            raise ValueError("stopper dump is missing trees")
        return cls(trees, header["feature_mode"], reward_spec, steps)

    def content_hash(self) -> str:
        return hashlib.sha256(self.serialize().encode()).hexdigest()[:12]


def reward_hash(spec: RewardSpec) -> str:
    return hashlib.sha256(spec.canonical().encode()).hexdigest()[:12]


@dataclass(frozen=True)
class StopResult:
    """Realized stopping of one ensemble under a composed rule.

    stop_step[k] is in 0..N, realized[k] the discounted reward collected at
    that step, counts[n] the number of paths stopped at step n.
    """

    stop_step: np.ndarray
    realized: np.ndarray
    counts: np.ndarray
    label: str
    ensemble_seed: int
    num_steps: int
    stopper_hash: str | None = None


def _check_compat(paths: PathEnsemble, spec: RewardSpec, feature_mode: str) -> None:
    if spec.kind == "put" and paths.dim != 1:
        raise ValueError("put reward needs one-dimensional paths")
    if spec.kind == "max_call_barrier" and not paths.has_barrier_indicator:
        raise ValueError("knock-out reward needs the barrier indicator coordinate")
    # raises on impossible feature/state combinations
    feats = features(feature_mode, spec, 0, paths.state_at(0)[:1])
    del feats


def loo_stop_mask(votes: np.ndarray, own_vote: np.ndarray, bags: int) -> np.ndarray:
    """Leave-one-out projector: stop iff the other B-1 bags' mean vote >= 1/2.

    ``votes`` counts STOP votes over all bags per path, ``own_vote`` is the
    vote of the path's own bag.  The comparison is integer-exact.
    """
    return (votes - own_vote) * 2 >= bags - 1


def bag_deltas(u_at_tau: np.ndarray, u_now: np.ndarray, bag_rows: np.ndarray, K: int) -> np.ndarray:
    """Per-path reward increments of one bag, in 1/K units."""
    return (u_at_tau[bag_rows] - u_now[bag_rows]) / K


def train(paths: PathEnsemble, reward_spec: RewardSpec, config: TrainConfig,
          threads: int = 1) -> BaggedStopper:
    """Fit the bagged stopper on a training ensemble.

    Paths are shuffled with a seeded Philox stream, truncated to a multiple of
    the bag count, and cut into contiguous equally sized bags.  Steps run
    strictly backward; within a step the bag trees are independent (grown
    concurrently when ``threads`` > 1, with identical results).
    """
    _check_compat(paths, reward_spec, config.feature_mode)
    B = config.bags
    K_all = paths.num_paths
    if K_all < B:
        raise ValueError(f"need at least {B} paths for {B} bags")
    N = paths.num_steps
    if reward_spec.steps != N:
        raise ValueError("reward spec and ensemble disagree on the step count")
    K = B * (K_all // B)
    rng = np.random.Generator(np.random.Philox(config.seed_bagging))
    perm = rng.permutation(K_all)[:K]
    bag_size = K // B
    bag_rows = [np.sort(perm[b * bag_size:(b + 1) * bag_size]) for b in range(B)]
    bag_of = np.full(K_all, -1, dtype=np.int32)
    for b, rows in enumerate(bag_rows):
        bag_of[rows] = b
    used = np.flatnonzero(bag_of >= 0)
    own = bag_of[used]

    # Rewards are evaluated per step; the reward at each path's current
    # continuation stop is carried along instead of materialising a K x (N+1)
    # matrix.
    u_at_tau = reward(reward_spec, N, paths.state_at(N))
    trees = [[None] * N for _ in range(B)]

    def grow_bag(args):
        b, feats_n, u_n = args
        rows = bag_rows[b]
        deltas = bag_deltas(u_at_tau, u_n, rows, K)
        samples = removal(feats_n[rows], deltas)
        return b, grow(samples, config.grow)

    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for n in range(N - 1, -1, -1):
            feats_n = features(config.feature_mode, reward_spec, n, paths.state_at(n))
            u_n = reward(reward_spec, n, paths.state_at(n))
            jobs = [(b, feats_n, u_n) for b in range(B)]
            if pool is not None:
                results = list(pool.map(grow_bag, jobs))
            else:
                results = [grow_bag(j) for j in jobs]
            for b, tree in results:
                trees[b][n] = tree
            # leave-one-out update of each bag's continuation stop
            votes = np.zeros(used.shape[0], dtype=np.int32)
            own_vote = np.zeros(used.shape[0], dtype=np.int32)
            fu = feats_n[used]
            for b in range(B):
                pred = trees[b][n].predict(fu)
                votes += pred
                own_vote[own == b] = pred[own == b]
            stop = loo_stop_mask(votes, own_vote, B)
            rows = used[stop]
            u_at_tau[rows] = u_n[rows]
    finally:
        if pool is not None:
            pool.shutdown()

    return BaggedStopper(trees, config.feature_mode, reward_spec, N)


def apply(stopper: BaggedStopper, paths: PathEnsemble) -> StopResult:
    """Evaluate the composed first-hit rule on an ensemble.

    A path stops at the first n < N where at least half the bag trees vote
    STOP on its step-n features, and at N otherwise.  Returns stop steps,
    realized rewards and per-step stop counts.
    """
    spec = stopper.reward_spec
    _check_compat(paths, spec, stopper.feature_mode)
    if paths.num_steps != stopper.num_steps:
        raise ValueError("ensemble and stopper disagree on the step count")
    K, N = paths.num_paths, paths.num_steps
    expected = feature_dim(stopper.feature_mode, spec, paths.dim)
    if stopper.trees[0][0].n_features != expected:
        raise ValueError("feature dimension does not match the trained trees")

    stop_step = np.full(K, N, dtype=np.int64)
    realized = np.empty(K)
    alive = np.arange(K)
    for n in range(N):
        if alive.size == 0:
            break
        states = paths.state_at(n)[alive]
        feats = features(stopper.feature_mode, spec, n, states)
        fire = stopper.step_rule(n, feats)
        if fire.any():
            hit = alive[fire]
            stop_step[hit] = n
            realized[hit] = reward(spec, n, states[fire])
            alive = alive[~fire]
    if alive.size:
        realized[alive] = reward(spec, N, paths.state_at(N)[alive])
    counts = np.bincount(stop_step, minlength=N + 1)
    return StopResult(stop_step, realized, counts, paths.label, paths.seed, N,
                      stopper_hash=stopper.content_hash())
