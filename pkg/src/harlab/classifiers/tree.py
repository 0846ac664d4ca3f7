"""Axis-aligned decision tree with deterministic split selection.

Candidate thresholds are midpoints between consecutive distinct sorted
values.  The best split maximizes impurity decrease; exact ties resolve to
the lower feature index, then the lower threshold.  A node becomes a leaf
when it is pure, smaller than two rows, at the depth cap, or admits no
split.  Zero-decrease splits are still taken (XOR-style data is separable
even though no single split reduces impurity), which keeps unbounded trees
pure on conflict-free data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import rng
from ..data import LabeledDataset
from .base import FitError, TrainedModel
from .params import ModelSpec, TreeParams


def impurity(class_counts, criterion: str) -> float:
    """Gini impurity (1 - sum p^2) or entropy (-sum p log2 p) of a count vector."""
    counts = np.asarray(class_counts, dtype=np.float64)
    if counts.size == 0 or (counts < 0).any():
        raise FitError("class counts must be non-negative")
    total = counts.sum()
    if total <= 0:
        raise FitError("class counts sum to zero")
    p = counts / total
    if criterion == "gini":
        return float(1.0 - np.sum(p * p))
    if criterion == "entropy":
        nz = p[p > 0]
        return float(-np.sum(nz * np.log2(nz)))
    raise FitError(f"unknown criterion {criterion!r}")


def _children_impurity_sums(
    counts_left: np.ndarray, counts_right: np.ndarray, criterion: str
) -> np.ndarray:
    """n_L * imp(L) + n_R * imp(R) for every candidate boundary, vectorized.

    counts_* are B x K class-count matrices for the B candidate splits.
    """
    n_l = counts_left.sum(axis=1)
    n_r = counts_right.sum(axis=1)
    if criterion == "gini":
        side_l = n_l - (counts_left * counts_left).sum(axis=1) / n_l
        side_r = n_r - (counts_right * counts_right).sum(axis=1) / n_r
        return side_l + side_r
    # entropy: n*H = n*log2(n) - sum c*log2(c), with 0*log 0 = 0
    def n_entropy(counts, n):
        c = counts.astype(np.float64)
        xlogx = np.zeros_like(c)
        mask = c > 0
        xlogx[mask] = c[mask] * np.log2(c[mask])
        return n * np.log2(n) - xlogx.sum(axis=1)

    return n_entropy(counts_left, n_l) + n_entropy(counts_right, n_r)


def best_split(
    X: np.ndarray,
    y_pos: np.ndarray,
    n_classes: int,
    candidate_features: np.ndarray,
    criterion: str,
) -> tuple[int, float, float] | None:
    """Best (feature, threshold, impurity_decrease) over the candidates.

    Returns None when no candidate feature has two distinct values.  Rows
    with value <= threshold go left.
    """
    n = X.shape[0]
    total_counts = np.bincount(y_pos, minlength=n_classes).astype(np.float64)
    parent = impurity(total_counts, criterion)
    best: tuple[float, int, float] | None = None  # (decrease, feature, threshold)
    for j in candidate_features:
        v = X[:, j]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        boundaries = np.flatnonzero(vs[:-1] < vs[1:])
        if boundaries.size == 0:
            continue
        onehot = np.zeros((n, n_classes), dtype=np.float64)
        onehot[np.arange(n), y_pos[order]] = 1.0
        cum = np.cumsum(onehot, axis=0)
        counts_left = cum[boundaries]
        counts_right = total_counts - counts_left
        weighted = _children_impurity_sums(counts_left, counts_right, criterion) / n
        decreases = parent - weighted
        k = int(np.argmax(decreases))  # first max: lowest threshold wins ties
        decrease = float(decreases[k])
        if decrease < 0.0:
            decrease = max(decrease, 0.0)  # guard float noise on no-gain splits
        threshold = 0.5 * (vs[boundaries[k]] + vs[boundaries[k] + 1])
        if best is None or decrease > best[0]:
            best = (decrease, int(j), float(threshold))
    if best is None:
        return None
    return best[1], best[2], best[0]


@dataclass
class TreeNodes:
    """Flat array representation: feature < 0 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    label_pos: np.ndarray  # majority class position, valid at every node

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depths[self.left[i]] = depths[i] + 1
                depths[self.right[i]] = depths[i] + 1
        return int(depths.max()) if self.n_nodes else 0


def _majority_position(counts: np.ndarray) -> int:
    return int(np.argmax(counts))  # first max: smaller class code wins ties


def build_tree(
    X: np.ndarray,
    y_pos: np.ndarray,
    n_classes: int,
    criterion: str,
    max_depth: int | None,
    feature_stream: rng.Stream | None = None,
    features_per_split: int | None = None,
) -> TreeNodes:
    """Grow a tree depth-first (left child before right).

    When ``feature_stream`` is given, each node scans a fresh random subset
    of ``features_per_split`` features; if the subset admits no split the
    scan falls back to all features so conflict-free data still separates.
    """
    n_features = X.shape[1]
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    label_pos: list[int] = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        label_pos.append(0)
        return len(feature) - 1

    root = new_node()
    stack = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        node, rows, depth = stack.pop()
        counts = np.bincount(y_pos[rows], minlength=n_classes)
        label_pos[node] = _majority_position(counts)
        if rows.size < 2 or impurity(counts, criterion) == 0.0:
            continue
        if max_depth is not None and depth >= max_depth:
            continue
        if feature_stream is not None and features_per_split is not None:
            subset = np.sort(feature_stream.take_permutation(n_features)[:features_per_split])
        else:
            subset = np.arange(n_features)
        found = best_split(X[rows], y_pos[rows], n_classes, subset, criterion)
        if found is None and subset.size < n_features:
            found = best_split(X[rows], y_pos[rows], n_classes, np.arange(n_features), criterion)
        if found is None:
            continue
        j, thr, _ = found
        go_left = X[rows, j] <= thr
        feature[node] = j
        threshold[node] = thr
        left_id = new_node()
        right_id = new_node()
        left[node] = left_id
        right[node] = right_id
        # push right first so the left subtree is built first
        stack.append((right_id, rows[~go_left], depth + 1))
        stack.append((left_id, rows[go_left], depth + 1))

    return TreeNodes(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold, dtype=np.float64),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        label_pos=np.array(label_pos, dtype=np.int64),
    )


def tree_apply(nodes: TreeNodes, X: np.ndarray) -> np.ndarray:
    """Leaf label position per row, by vectorized level-wise descent."""
    n = X.shape[0]
    cur = np.zeros(n, dtype=np.int64)
    while True:
        feats = nodes.feature[cur]
        active = feats >= 0
        if not active.any():
            return nodes.label_pos[cur]
        rows = np.flatnonzero(active)
        f = feats[rows]
        go_left = X[rows, f] <= nodes.threshold[cur[rows]]
        nxt = np.where(go_left, nodes.left[cur[rows]], nodes.right[cur[rows]])
        cur[rows] = nxt


class DecisionTreeModel(TrainedModel):
    """Fitted tree with the uniform predict contract."""

    def __init__(self, spec: ModelSpec, classes: tuple[int, ...], n_features_in: int,
                 nodes: TreeNodes):
        super().__init__(spec, classes, n_features_in)
        self.nodes = nodes

    def _predict(self, X: np.ndarray) -> np.ndarray:
        return self.class_array()[tree_apply(self.nodes, X)]


def class_positions(ds: LabeledDataset) -> tuple[tuple[int, ...], np.ndarray]:
    """(sorted present classes, per-row class positions)."""
    classes = tuple(ds.present_classes())
    lookup = {c: i for i, c in enumerate(classes)}
    y_pos = np.array([lookup[int(c)] for c in ds.labels], dtype=np.int64)
    return classes, y_pos


def fit_decision_tree(spec: ModelSpec, ds: LabeledDataset) -> DecisionTreeModel:
    params: TreeParams = spec.params
    classes, y_pos = class_positions(ds)
    nodes = build_tree(ds.features, y_pos, len(classes), params.criterion, params.max_depth)
    return DecisionTreeModel(spec, classes, ds.d, nodes)
