"""One-vs-rest logistic regression.

Objective per binary component, with targets y in {-1, +1}:

    J(w, b) = sum_i log(1 + exp(-y_i (w.x_i + b))) + P(w) / C

P is the L1 norm or half the squared L2 norm; the intercept is never
penalized.  The smooth L2 problem is minimized with a limited-memory
quasi-Newton loop (two-loop recursion, Armijo backtracking); the non-smooth
L1 problem with proximal gradient (soft-thresholding) plus FISTA momentum.
Both start from the zero vector and only ever accept descent steps, so the
final loss can never exceed the zero-weight loss N*ln(2).
"""

from __future__ import annotations

import numpy as np

from ..data import LabeledDataset
from .base import FitError, TrainedModel
from .params import LogRegParams, ModelSpec


def _log1pexp(z: np.ndarray) -> np.ndarray:
    """log(1 + exp(z)) without overflow."""
    out = np.empty_like(z)
    hi = z > 30.0
    out[hi] = z[hi]
    out[~hi] = np.log1p(np.exp(z[~hi]))
    return out


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    nonneg = z >= 0
    out[nonneg] = 1.0 / (1.0 + np.exp(-z[nonneg]))
    ez = np.exp(z[~nonneg])
    out[~nonneg] = ez / (1.0 + ez)
    return out


def _data_loss_grad(theta: np.ndarray, X: np.ndarray, y: np.ndarray):
    """Unpenalized loss and gradient; theta packs (w, b)."""
    w, b = theta[:-1], theta[-1]
    margins = y * (X @ w + b)
    loss = float(np.sum(_log1pexp(-margins)))
    coef = -y * _sigmoid(-margins)
    grad = np.empty_like(theta)
    grad[:-1] = X.T @ coef
    grad[-1] = coef.sum()
    return loss, grad


def _fit_l2(X: np.ndarray, y: np.ndarray, c: float, max_iter: int, tol: float):
    """Limited-memory quasi-Newton minimization of the smooth L2 objective."""
    n, d = X.shape
    theta = np.zeros(d + 1)
    reg = 1.0 / c

    def objective(t):
        loss, grad = _data_loss_grad(t, X, y)
        loss += 0.5 * reg * float(t[:-1] @ t[:-1])
        grad = grad.copy()
        grad[:-1] += reg * t[:-1]
        return loss, grad

    f, g = objective(theta)
    memory: list[tuple[np.ndarray, np.ndarray]] = []
    m = 10
    converged = False
    for _ in range(max_iter):
        if np.max(np.abs(g)) / n <= tol:
            converged = True
            break
        # two-loop recursion for the search direction
        q = g.copy()
        alphas = []
        for s, yv in reversed(memory):
            rho = 1.0 / float(yv @ s)
            a = rho * float(s @ q)
            alphas.append((a, rho, s, yv))
            q -= a * yv
        if memory:
            s_last, y_last = memory[-1]
            q *= float(s_last @ y_last) / float(y_last @ y_last)
        for a, rho, s, yv in reversed(alphas):
            beta = rho * float(yv @ q)
            q += (a - beta) * s
        direction = -q
        descent = float(g @ direction)
        if descent >= 0.0:  # safeguard: fall back to steepest descent
            direction = -g
            descent = -float(g @ g)
        step = 1.0 if memory else 1.0 / max(1.0, float(np.max(np.abs(g))))
        accepted = False
        for _ in range(40):
            cand = theta + step * direction
            f_new, g_new = objective(cand)
            if f_new <= f + 1e-4 * step * descent:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break  # cannot make progress at float precision
        s_vec = cand - theta
        y_vec = g_new - g
        if float(s_vec @ y_vec) > 1e-10:
            memory.append((s_vec, y_vec))
            if len(memory) > m:
                memory.pop(0)
        theta, f, g = cand, f_new, g_new
    return theta, f, converged


def _fit_l1(X: np.ndarray, y: np.ndarray, c: float, max_iter: int, tol: float):
    """Proximal gradient with FISTA momentum and backtracking line search."""
    n, d = X.shape
    reg = 1.0 / c

    def penalty(t):
        return reg * float(np.abs(t[:-1]).sum())

    def prox(t, step):
        out = t.copy()
        out[:-1] = np.sign(t[:-1]) * np.maximum(np.abs(t[:-1]) - step * reg, 0.0)
        return out

    theta = np.zeros(d + 1)
    momentum = theta.copy()
    t_k = 1.0
    loss, _ = _data_loss_grad(theta, X, y)
    best_obj = loss + penalty(theta)
    best_theta = theta.copy()
    # crude Lipschitz seed: ||X||_F^2 / 4 bounds the logistic Hessian norm
    lip = max(1e-3, 0.25 * float(np.sum(X * X)) / max(1, d))
    step = 1.0 / lip
    prev_obj = best_obj
    converged = False
    for _ in range(max_iter):
        loss_m, grad_m = _data_loss_grad(momentum, X, y)
        step = min(step * 1.2, 1e6)  # let the step recover after conservative shrinks
        while True:
            cand = prox(momentum - step * grad_m, step)
            diff = cand - momentum
            loss_c, _ = _data_loss_grad(cand, X, y)
            quad = loss_m + float(grad_m @ diff) + float(diff @ diff) / (2.0 * step)
            if loss_c <= quad + 1e-12 * abs(quad) or step < 1e-18:
                break
            step *= 0.5
        obj = loss_c + penalty(cand)
        if obj < best_obj:
            best_obj = obj
            best_theta = cand.copy()
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_k * t_k))
        momentum = cand + ((t_k - 1.0) / t_next) * (cand - theta)
        theta, t_k = cand, t_next
        if abs(prev_obj - obj) <= tol * max(1.0, abs(obj)):
            converged = True
            break
        prev_obj = obj
    return best_theta, best_obj, converged


class LogisticRegressionModel(TrainedModel):
    def __init__(self, spec: ModelSpec, classes: tuple[int, ...], n_features_in: int,
                 weights: np.ndarray, intercepts: np.ndarray):
        super().__init__(spec, classes, n_features_in)
        self.weights = weights      # K x D, one one-vs-rest component per class
        self.intercepts = intercepts

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        return X @ self.weights.T + self.intercepts

    def _predict(self, X: np.ndarray) -> np.ndarray:
        scores = self.decision_scores(X)
        return self.class_array()[np.argmax(scores, axis=1)]

    def _predict_proba(self, X: np.ndarray) -> np.ndarray:
        # normalized one-vs-rest sigmoids; argmax matches the raw scores
        raw = _sigmoid(self.decision_scores(X))
        return raw / raw.sum(axis=1, keepdims=True)


def fit_logistic_regression(spec: ModelSpec, ds: LabeledDataset) -> LogisticRegressionModel:
    params: LogRegParams = spec.params
    classes = tuple(ds.present_classes())
    X = ds.features
    weights = np.zeros((len(classes), ds.d))
    intercepts = np.zeros(len(classes))
    converged_all = True
    final_losses = []
    for i, cls in enumerate(classes):
        y = np.where(ds.labels == cls, 1.0, -1.0)
        if params.regularizer == "l2":
            theta, obj, converged = _fit_l2(X, y, params.c, params.max_iter, params.tolerance)
        else:
            theta, obj, converged = _fit_l1(X, y, params.c, params.max_iter, params.tolerance)
        weights[i] = theta[:-1]
        intercepts[i] = theta[-1]
        converged_all &= converged
        final_losses.append(obj)
    model = LogisticRegressionModel(spec, classes, ds.d, weights, intercepts)
    model.converged = converged_all
    model.fit_info["final_objectives"] = final_losses
    model.fit_info["zero_weight_objective"] = ds.n * float(np.log(2.0))
    return model
