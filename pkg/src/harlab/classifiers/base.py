"""Shared fitted-model contract: immutable state, checked predict inputs."""

from __future__ import annotations

import numpy as np

from .params import ModelSpec


class FitError(ValueError):
    pass


class PredictError(ValueError):
    pass


class TrainedModel:
    """Base for all fitted models.

    Subclasses set family-specific state at construction and implement
    ``_predict``; families with probability semantics also implement
    ``_predict_proba``.  ``converged`` records (never aborts on) optimizer
    non-convergence.
    """

    def __init__(self, spec: ModelSpec, classes: tuple[int, ...], n_features_in: int):
        self.spec = spec
        self.classes = tuple(int(c) for c in classes)
        self.n_features_in = int(n_features_in)
        self.converged = True
        self.fit_info: dict = {}

    def check_input(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise PredictError(f"feature matrix must be 2-D, got shape {X.shape}")
        if X.shape[1] != self.n_features_in:
            raise PredictError(
                f"model was trained on {self.n_features_in} features, got {X.shape[1]}"
            )
        if not np.isfinite(X).all():
            raise PredictError("non-finite value in feature matrix")
        return X

    def class_array(self) -> np.ndarray:
        return np.array(self.classes, dtype=np.int64)

    def predict(self, X) -> np.ndarray:
        return self._predict(self.check_input(X))

    def predict_proba(self, X) -> np.ndarray:
        proba = self._predict_proba(self.check_input(X))
        return proba

    def _predict(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _predict_proba(self, X: np.ndarray) -> np.ndarray:
        raise PredictError(
            f"family {self.spec.family!r} has no probability semantics"
        )


def check_train_dataset(ds) -> None:
    if ds.n == 0:
        raise FitError("cannot fit on an empty dataset")
    if len(ds.present_classes()) < 2:
        raise FitError("need at least two classes present to fit a classifier")
