"""Feed-forward network: sigmoid hidden layers, softmax output, Adam updates.

The loss for a batch of size B is mean cross-entropy plus an L2 penalty on
the weight matrices (never the biases), alpha/(2B) * sum ||W||^2.  Training
shuffles each epoch with seeded permutations; an epoch whose mean loss fails
to improve on the running best by ``tol`` for ``n_iter_no_change`` epochs in
a row ends training early, otherwise the epoch cap applies and the model is
flagged non-converged.
"""

from __future__ import annotations

import numpy as np

from .. import rng
from ..data import LabeledDataset
from .base import TrainedModel
from .params import MlpParams, ModelSpec


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    nonneg = z >= 0
    out[nonneg] = 1.0 / (1.0 + np.exp(-z[nonneg]))
    ez = np.exp(z[~nonneg])
    out[~nonneg] = ez / (1.0 + ez)
    return out


def init_parameters(layer_sizes: list[int], seed: int) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases."""
    weights, biases = [], []
    for layer, (fan_in, fan_out) in enumerate(zip(layer_sizes[:-1], layer_sizes[1:])):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        u = rng.uniform(rng.derive_seed(seed, "mlp_init", layer), fan_in * fan_out)
        weights.append(((u * 2.0 - 1.0) * bound).reshape(fan_in, fan_out))
        biases.append(np.zeros(fan_out))
    return weights, biases


def forward(weights, biases, X: np.ndarray) -> list[np.ndarray]:
    """Activations per layer; the final entry is the softmax output."""
    acts = [X]
    a = X
    for layer, (W, b) in enumerate(zip(weights, biases)):
        z = a @ W + b
        a = _softmax(z) if layer == len(weights) - 1 else _sigmoid(z)
        acts.append(a)
    return acts


def loss_and_grad(
    weights: list[np.ndarray],
    biases: list[np.ndarray],
    X: np.ndarray,
    onehot: np.ndarray,
    alpha: float,
):
    """Batch loss and analytic gradients (checked against finite differences)."""
    B = X.shape[0]
    acts = forward(weights, biases, X)
    probs = acts[-1]
    ce = -np.sum(onehot * np.log(np.maximum(probs, 1e-300))) / B
    penalty = 0.5 * alpha / B * sum(float(np.sum(W * W)) for W in weights)
    loss = ce + penalty

    grads_w = [np.empty_like(W) for W in weights]
    grads_b = [np.empty_like(b) for b in biases]
    delta = (probs - onehot) / B
    for layer in range(len(weights) - 1, -1, -1):
        grads_w[layer] = acts[layer].T @ delta + (alpha / B) * weights[layer]
        grads_b[layer] = delta.sum(axis=0)
        if layer > 0:
            hidden = acts[layer]
            delta = (delta @ weights[layer].T) * hidden * (1.0 - hidden)
    return loss, grads_w, grads_b


class MlpModel(TrainedModel):
    def __init__(self, spec: ModelSpec, classes: tuple[int, ...], n_features_in: int,
                 weights: list[np.ndarray], biases: list[np.ndarray]):
        super().__init__(spec, classes, n_features_in)
        self.weights = weights
        self.biases = biases

    def _predict_proba(self, X: np.ndarray) -> np.ndarray:
        return forward(self.weights, self.biases, X)[-1]

    def _predict(self, X: np.ndarray) -> np.ndarray:
        return self.class_array()[np.argmax(self._predict_proba(X), axis=1)]


def fit_mlp(spec: ModelSpec, ds: LabeledDataset) -> MlpModel:
    params: MlpParams = spec.params
    classes = tuple(ds.present_classes())
    lookup = {c: i for i, c in enumerate(classes)}
    X = ds.features
    n, d = X.shape
    k = len(classes)
    onehot = np.zeros((n, k))
    onehot[np.arange(n), [lookup[int(c)] for c in ds.labels]] = 1.0

    layer_sizes = [d, *params.hidden_sizes, k]
    weights, biases = init_parameters(layer_sizes, spec.seed)
    m_w = [np.zeros_like(W) for W in weights]
    v_w = [np.zeros_like(W) for W in weights]
    m_b = [np.zeros_like(b) for b in biases]
    v_b = [np.zeros_like(b) for b in biases]
    eps = 1e-8
    lr, b1, b2 = params.learning_rate, params.beta1, params.beta2
    batch = params.batch_size if params.batch_size is not None else min(200, n)
    batch = min(batch, n)

    step = 0
    best_loss = np.inf
    stale = 0
    converged = False
    epochs_run = 0
    for epoch in range(params.max_epochs):
        if params.shuffle_each_epoch:
            order = rng.permutation(rng.derive_seed(spec.seed, "mlp_shuffle", epoch), n)
        else:
            order = np.arange(n)
        epoch_loss = 0.0
        for start in range(0, n, batch):
            rows = order[start : start + batch]
            loss, gw, gb = loss_and_grad(weights, biases, X[rows], onehot[rows], params.alpha)
            epoch_loss += loss * rows.size
            step += 1
            corr1 = 1.0 - b1**step
            corr2 = 1.0 - b2**step
            for layer in range(len(weights)):
                for param, grad, mom, vel in (
                    (weights[layer], gw[layer], m_w[layer], v_w[layer]),
                    (biases[layer], gb[layer], m_b[layer], v_b[layer]),
                ):
                    mom *= b1
                    mom += (1.0 - b1) * grad
                    vel *= b2
                    vel += (1.0 - b2) * grad * grad
                    param -= lr * (mom / corr1) / (np.sqrt(vel / corr2) + eps)
        epochs_run = epoch + 1
        epoch_loss /= n
        if epoch_loss < best_loss - params.tol:
            stale = 0
        else:
            stale += 1
        best_loss = min(best_loss, epoch_loss)
        if stale >= params.n_iter_no_change:
            converged = True
            break

    model = MlpModel(spec, classes, d, weights, biases)
    model.converged = converged
    model.fit_info["epochs_run"] = epochs_run
    model.fit_info["final_epoch_loss"] = float(best_loss)
    return model
