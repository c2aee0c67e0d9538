"""Binary decision trees with {0,1} leaves grown on signed reward increments.

Training data for one tree is a set of feature points, each carrying a signed
increment delta (continuation reward minus immediate reward, in 1/K units).
Duplicate points are first merged by ``removal``: a group of m equal points
becomes one sample with the group-average delta and multiplicity m.  All
score and leaf-sign computations then use the effective per-point weight
m * delta, which preserves weighted sums over the original data.

Two split finders ship:

* ``prototype_split`` always splits multi-point nodes at the position whose
  one-sided partial-sum magnitude is largest, driving nodes down to single
  points.  The resulting tree attains the training-data minimum of
  sum_k w_k * g(point_k) over all {0,1}-valued g.
* ``delta_split`` performs the same scan but only splits when the best score
  strictly exceeds |total weight|; otherwise the node becomes a leaf whose
  weight is 1 (STOP) for strictly negative total and 0 (CONTINUE) otherwise.
  This is the data-driven size control used throughout training.

Traversal convention: left branch iff x[dim] <= threshold, thresholds are the
left boundary sample value itself.  Leaf weight 1 means STOP, 0 CONTINUE.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DeltaSamples:
    """Merged (point, delta, multiplicity) training set with distinct points.

    points: (m, d) array of pairwise-distinct rows, first-occurrence order.
    delta:  (m,) group-average increments.
    mult:   (m,) group sizes (1 unless duplicates were merged).
    """

    points: np.ndarray
    delta: np.ndarray
    mult: np.ndarray

    def __post_init__(self):
        if self.points.ndim != 2:
            raise ValueError("points must be a (m, d) matrix")
        m = self.points.shape[0]
        if self.delta.shape != (m,) or self.mult.shape != (m,):
            raise ValueError("delta/mult length must match points")
        if m and self.mult.min() < 1:
            raise ValueError("multiplicities must be >= 1")

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def weight(self) -> np.ndarray:
        """Effective per-point weight m_k * delta_k."""
        return self.mult * self.delta


def removal(points, deltas) -> DeltaSamples:
    """Merge duplicate points, averaging their deltas and recording group size.

    Grouping is by exact equality of the full point vector; output order is
    the order of first occurrence.  For any {0,1} function g evaluated on the
    output, sum(mult * delta * g(point)) equals the weighted sum over the
    unmerged input.
    """
    pts = np.asarray(points, dtype=float)
    dl = np.asarray(deltas, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    if pts.shape[0] != dl.shape[0]:
        raise ValueError("points and deltas must have equal length")
    if pts.shape[0] == 0:
        return DeltaSamples(pts.reshape(0, max(pts.shape[1], 1)), dl, np.zeros(0, dtype=np.int64))
    uniq, first, inverse, counts = np.unique(
        pts, axis=0, return_index=True, return_inverse=True, return_counts=True
    )
    sums = np.bincount(inverse, weights=dl, minlength=uniq.shape[0])
    order = np.argsort(first, kind="stable")
    return DeltaSamples(uniq[order], (sums / counts)[order], counts[order].astype(np.int64))


@dataclass(frozen=True)
class Split:
    dim: int
    threshold: float


@dataclass(frozen=True)
class Leaf:
    weight: int

    def __post_init__(self):
        if self.weight not in (0, 1):
            raise ValueError("leaf weight must be 0 or 1")


def _leaf_for(total: float) -> Leaf:
    # Nodes with an exactly-zero total arise only when every sample carries a
    # zero increment (continuation and immediate reward both worthless on the
    # ensemble).  Stopping there realizes nothing in sample and generalizes
    # worse out of sample, so such nodes are left running.
    return Leaf(0 if total >= 0 else 1)


def _scan(points: np.ndarray, weight: np.ndarray, orders, total: float):
    """Best split over all dims and valid positions of one node.

    ``orders`` holds, per dim, the node's row indices sorted by (coordinate,
    original sample index); ``total`` is the node's weight sum (accumulated in
    original sample order, so decisions are reproducible bit for bit).

    Positions are valid only where consecutive sorted coordinates strictly
    increase, so the emitted <=-threshold reproduces the internal partition.
    Score of a position is max(|prefix weight sum|, |total - prefix|); ties
    are broken by the first strict improvement scanning dims ascending and
    sorted positions ascending.

    Returns (score, dim, threshold, left_rows, right_rows) or None when no
    dim has a valid position.  Row arrays index into ``points``.
    """
    best = None
    for d in range(points.shape[1]):
        order = orders[d]
        vals = points[order, d]
        if vals[0] == vals[-1]:
            continue
        prefix = np.cumsum(weight[order])[:-1]
        scores = np.maximum(np.abs(prefix), np.abs(total - prefix))
        scores[vals[:-1] >= vals[1:]] = -np.inf
        k = int(np.argmax(scores))
        s = scores[k]
        if best is None or s > best[0]:
            best = (float(s), d, float(vals[k]), order[: k + 1], order[k + 1 :])
    return best


def _full_orders(samples: DeltaSamples) -> list[np.ndarray]:
    idx = np.arange(len(samples))
    return [np.lexsort((idx, samples.points[:, d])) for d in range(samples.dim)]


def delta_split(samples: DeltaSamples) -> Split | Leaf:
    """Size-controlled split decision.

    Splits only when the best one-sided partial-sum score strictly exceeds
    |total weight|; in particular any same-sign weight set yields a leaf.
    """
    if len(samples) == 0:
        raise ValueError("empty sample set")
    total = float(np.sum(samples.weight))
    best = _scan(samples.points, samples.weight, _full_orders(samples), total)
    if best is not None and best[0] > abs(total):
        return Split(best[1], best[2])
    return _leaf_for(total)


def prototype_split(samples: DeltaSamples) -> Split | Leaf:
    """Unconditional split decision: multi-point nodes always split.

    A single sample becomes a leaf, STOP exactly when its delta is negative.
    """
    if len(samples) == 0:
        raise ValueError("empty sample set")
    if len(samples) == 1:
        return _leaf_for(float(samples.weight[0]))
    total = float(np.sum(samples.weight))
    best = _scan(samples.points, samples.weight, _full_orders(samples), total)
    if best is None:
        raise RuntimeError("no valid split position: points not distinct")
    return Split(best[1], best[2])


DELTA = "delta"
PROTOTYPE = "prototype"


@dataclass(frozen=True)
class GrowConfig:
    """Ad hoc growth controls on top of the splitter's own size control."""

    max_depth: int = 10
    min_node_size: int = 10
    splitter: str = DELTA

    def __post_init__(self):
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.min_node_size < 1:
            raise ValueError("min_node_size must be >= 1")
        if self.splitter not in (DELTA, PROTOTYPE):
            raise ValueError(f"unknown splitter {self.splitter!r}")


class CartTree:
    """Flat-array binary tree over feature vectors with {0,1} leaf weights.

    Nodes live in parallel arrays; ``feature[i] == -1`` marks a leaf whose
    weight is ``leaf_weight[i]``.  Internal nodes route x left iff
    x[feature[i]] <= threshold[i].
    """

    __slots__ = ("feature", "threshold", "left", "right", "leaf_weight", "n_features")

    def __init__(self, feature, threshold, left, right, leaf_weight, n_features):
        self.feature = np.asarray(feature, dtype=np.int32)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=np.int32)
        self.right = np.asarray(right, dtype=np.int32)
        self.leaf_weight = np.asarray(leaf_weight, dtype=np.int8)
        self.n_features = int(n_features)

    @classmethod
    def single_leaf(cls, weight: int, n_features: int) -> "CartTree":
        return cls([-1], [0.0], [-1], [-1], [weight], n_features)

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def leaf_count(self) -> int:
        return int(np.sum(self.feature < 0))

    @property
    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=int)
        out = 0
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depths[self.left[i]] = depths[i] + 1
                depths[self.right[i]] = depths[i] + 1
            else:
                out = max(out, int(depths[i]))
        return out

    def predict(self, x) -> int | np.ndarray:
        """Leaf weight reached by x (a feature vector or a (K, d) matrix)."""
        arr = np.asarray(x, dtype=float)
        single = arr.ndim == 1
        if single:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2 or arr.shape[1] != self.n_features:
            raise ValueError(f"expected feature dim {self.n_features}, got shape {arr.shape}")
        node = np.zeros(arr.shape[0], dtype=np.int32)
        rows = np.arange(arr.shape[0])
        while True:
            internal = self.feature[node] >= 0
            if not internal.any():
                break
            feat = np.where(internal, self.feature[node], 0)
            go_left = arr[rows, feat] <= self.threshold[node]
            nxt = np.where(go_left, self.left[node], self.right[node])
            node = np.where(internal, nxt, node)
        out = self.leaf_weight[node].astype(np.int8)
        return int(out[0]) if single else out

    def to_text(self) -> str:
        """Line-oriented dump: ``id split dim threshold left right`` or ``id leaf weight``.

        Thresholds use repr (shortest float64 round-trip).  Stable within a
        major version.
        """
        lines = [f"tree nodes={self.n_nodes} features={self.n_features}"]
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                lines.append(
                    f"{i} split {self.feature[i]} {float(self.threshold[i])!r} "
                    f"{self.left[i]} {self.right[i]}"
                )
            else:
                lines.append(f"{i} leaf {self.leaf_weight[i]}")
        return "\n".join(lines)

    @classmethod
    def from_text(cls, text: str) -> "CartTree":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        head = lines[0].split()
        if head[0] != "tree":
            raise ValueError("not a tree dump")
        meta = dict(part.split("=") for part in head[1:])
        n = int(meta["nodes"])
        feature = np.full(n, -1, dtype=np.int32)
        threshold = np.zeros(n)
        left = np.full(n, -1, dtype=np.int32)
        right = np.full(n, -1, dtype=np.int32)
        weight = np.zeros(n, dtype=np.int8)
        for ln in lines[1:]:
            parts = ln.split()
            i, kind = int(parts[0]), parts[1]
            if kind == "split":
                feature[i] = int(parts[2])
                threshold[i] = float(parts[3])
                left[i] = int(parts[4])
                right[i] = int(parts[5])
            elif kind == "leaf":
                weight[i] = int(parts[2])
            else:
                raise ValueError(f"bad node line: {ln!r}")
        return cls(feature, threshold, left, right, weight, int(meta["features"]))


class _Builder:
    def __init__(self):
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.weight = []

    def add_leaf(self, w: int) -> int:
        i = len(self.feature)
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.weight.append(w)
        return i

    def add_split(self, dim: int, thr: float) -> int:
        i = len(self.feature)
        self.feature.append(dim)
        self.threshold.append(thr)
        self.left.append(-1)
        self.right.append(-1)
        self.weight.append(-1)
        return i


def grow(samples: DeltaSamples, config: GrowConfig) -> CartTree:
    """Recursively apply the configured splitter to build a tree.

    A node is forced to a leaf (weight by the sign of its total weight) when
    it sits at max_depth or holds fewer than min_node_size samples; otherwise
    the splitter decides.  Children receive the sorted partition's subsets.
    """
    if len(samples) == 0:
        raise ValueError("empty sample set")
    points = samples.points
    weight = samples.weight
    proto = config.splitter == PROTOTYPE
    builder = _Builder()

    # Per-dim sample orderings (coordinate, then sample index) are computed
    # once at the root and filtered through partitions, never re-sorted.  Each
    # node also carries its rows in original sample order so weight totals
    # accumulate exactly as in the standalone split functions.
    m = len(samples)
    root_orders = [np.lexsort((np.arange(m), points[:, d])) for d in range(points.shape[1])]
    root_rows = np.arange(m)
    member = np.empty(m, dtype=bool)

    def build(rows, rows_orders, depth: int) -> int:
        total = float(np.sum(weight[rows]))
        if depth >= config.max_depth or rows.shape[0] < config.min_node_size:
            return builder.add_leaf(_leaf_for(total).weight)
        if rows.shape[0] == 1:
            return builder.add_leaf(_leaf_for(total).weight)
        best = _scan(points, weight, rows_orders, total)
        if best is None:
            if proto:
                raise RuntimeError("no valid split position: points not distinct")
            return builder.add_leaf(_leaf_for(total).weight)
        score, dim, thr, left_rows, right_rows = best
        if not proto and score <= abs(total):
            return builder.add_leaf(_leaf_for(total).weight)
        node_id = builder.add_split(dim, thr)
        member[:] = False
        member[left_rows] = True
        left_sub = (rows[member[rows]],
                    [o[member[o]] for o in rows_orders])
        member[:] = False
        member[right_rows] = True
        right_sub = (rows[member[rows]],
                     [o[member[o]] for o in rows_orders])
        builder.left[node_id] = build(left_sub[0], left_sub[1], depth + 1)
        builder.right[node_id] = build(right_sub[0], right_sub[1], depth + 1)
        return node_id

    root = build(root_rows, root_orders, 0)
    assert root == 0
    return CartTree(
        builder.feature, builder.threshold, builder.left, builder.right,
        builder.weight, points.shape[1],
    )


def predict(tree: CartTree, x) -> int | np.ndarray:
    """Functional alias for ``tree.predict``."""
    return tree.predict(x)
