"""Bagged trees with per-node feature subsampling and majority voting."""

from __future__ import annotations

import numpy as np

from .. import rng
from ..data import LabeledDataset
from .base import TrainedModel
from .params import ForestParams, ModelSpec
from .tree import TreeNodes, build_tree, class_positions, tree_apply


class RandomForestModel(TrainedModel):
    def __init__(self, spec: ModelSpec, classes: tuple[int, ...], n_features_in: int,
                 trees: list[TreeNodes]):
        super().__init__(spec, classes, n_features_in)
        self.trees = trees

    def _vote_fractions(self, X: np.ndarray) -> np.ndarray:
        votes = np.zeros((X.shape[0], len(self.classes)), dtype=np.float64)
        for nodes in self.trees:
            leaf_pos = tree_apply(nodes, X)
            votes[np.arange(X.shape[0]), leaf_pos] += 1.0
        return votes / len(self.trees)

    def _predict(self, X: np.ndarray) -> np.ndarray:
        # argmax takes the first maximum, so vote ties go to the smaller code
        return self.class_array()[np.argmax(self._vote_fractions(X), axis=1)]

    def _predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self._vote_fractions(X)


def fit_random_forest(spec: ModelSpec, ds: LabeledDataset) -> RandomForestModel:
    """Bootstrap samples of size N per tree; per-tree seeds are pre-derived
    from the spec seed so any fitting order yields the same forest."""
    params: ForestParams = spec.params
    classes, y_pos = class_positions(ds)
    m = params.features_per_split
    if m is None:
        m = max(1, int(np.floor(np.sqrt(ds.d))))
    m = min(m, ds.d)
    trees = []
    for t in range(params.n_estimators):
        tree_seed = rng.derive_seed(spec.seed, "forest_tree", t)
        boot = rng.randint(rng.derive_seed(tree_seed, "bootstrap"), ds.n, ds.n)
        stream = rng.Stream(rng.derive_seed(tree_seed, "node_features"))
        nodes = build_tree(
            ds.features[boot],
            y_pos[boot],
            len(classes),
            params.criterion,
            params.max_depth,
            feature_stream=stream,
            features_per_split=m,
        )
        trees.append(nodes)
    model = RandomForestModel(spec, classes, ds.d, trees)
    model.fit_info["features_per_split"] = m
    return model
