"""Soft-margin kernel SVM solved by SMO-style pairwise dual updates.

The binary solver keeps the full gradient of the dual and repeatedly updates
the maximal violating pair (the classic working-set rule), with the kernel
matrix precomputed once per problem.  Multiclass is one-vs-one over all
class pairs with majority voting; vote ties break by summed decision-function
magnitude, then by the smaller class code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import LabeledDataset
from .base import FitError, TrainedModel
from .params import ModelSpec, SvmParams

_TAU = 1e-12


def resolve_gamma(gamma: float | None, X: np.ndarray) -> float:
    """Auto rule: 1 / (D * mean per-feature variance)."""
    if gamma is not None:
        return float(gamma)
    mean_var = float(np.mean(X.var(axis=0)))
    if mean_var <= 0:
        mean_var = 1.0
    return 1.0 / (X.shape[1] * mean_var)


def kernel_eval(kernel: str, gamma: float, x, z, coef0: float = 0.0) -> float:
    """Kernel value for a single vector pair."""
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != z.shape:
        raise FitError(f"kernel arguments differ in dimension: {x.shape} vs {z.shape}")
    out = float(kernel_matrix(kernel, gamma, x[None, :], z[None, :], coef0)[0, 0])
    if not np.isfinite(out):
        raise FitError(f"non-finite kernel value for kernel {kernel!r}")
    return out


def kernel_matrix(kernel: str, gamma: float, X: np.ndarray, Z: np.ndarray,
                  coef0: float = 0.0) -> np.ndarray:
    """K[i, j] = k(X[i], Z[j])."""
    if kernel == "linear":
        return X @ Z.T
    if kernel == "rbf":
        sq = (
            np.sum(X * X, axis=1)[:, None]
            - 2.0 * (X @ Z.T)
            + np.sum(Z * Z, axis=1)[None, :]
        )
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-gamma * sq)
    if kernel == "sigmoid":
        return np.tanh(gamma * (X @ Z.T) + coef0)
    raise FitError(f"unknown kernel {kernel!r}")


@dataclass
class BinarySvm:
    """Solution of one binary subproblem: f(x) = sum alpha_i y_i k(x_i, x) + b."""

    alpha: np.ndarray          # full-length dual coefficients
    bias: float
    support: np.ndarray        # indices with alpha > 0
    converged: bool
    n_iter: int
    kernel: str
    gamma: float
    coef0: float
    sv_x: np.ndarray           # support rows of the training matrix
    sv_coef: np.ndarray        # alpha_i * y_i over support rows
    w: np.ndarray | None       # explicit primal weights (linear kernel only)

    def decision(self, X: np.ndarray) -> np.ndarray:
        if self.w is not None:
            return X @ self.w + self.bias
        K = kernel_matrix(self.kernel, self.gamma, X, self.sv_x, self.coef0)
        return K @ self.sv_coef + self.bias


def fit_svm_binary(X: np.ndarray, y: np.ndarray, params: SvmParams) -> BinarySvm:
    """Solve the soft-margin dual: min 1/2 a'Qa - 1'a, 0 <= a <= C, y'a = 0.

    Stops when the maximal KKT violation drops below ``params.tolerance`` or
    after ``params.max_passes`` sweep-equivalents (n updates each); hitting
    the cap flags the solution as non-converged instead of raising.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    if not ((y == 1.0) | (y == -1.0)).all():
        raise FitError("binary SVM labels must be +1/-1")
    if (y > 0).sum() == 0 or (y < 0).sum() == 0:
        raise FitError("both classes must be present")
    C = params.c
    gamma = resolve_gamma(params.gamma, X)
    K = kernel_matrix(params.kernel, gamma, X, X, params.coef0)
    if not np.isfinite(K).all():
        raise FitError("non-finite kernel matrix")
    Kd = np.diag(K).copy()

    alpha = np.zeros(n)
    G = -np.ones(n)  # gradient of the minimization objective at alpha = 0
    pos = y > 0
    max_iter = max(1000, params.max_passes * n)
    converged = False
    it = 0
    while it < max_iter:
        neg_yG = -y * G
        up = (pos & (alpha < C)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < C))
        if not up.any() or not low.any():
            converged = True
            break
        up_vals = np.where(up, neg_yG, -np.inf)
        low_vals = np.where(low, neg_yG, np.inf)
        i = int(np.argmax(up_vals))
        j = int(np.argmin(low_vals))
        if up_vals[i] - low_vals[j] <= params.tolerance:
            converged = True
            break

        quad = Kd[i] + Kd[j] - 2.0 * K[i, j]
        if quad <= 0.0:
            quad = _TAU
        old_ai, old_aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            delta = (-G[i] - G[j]) / quad
            diff = old_ai - old_aj
            ai, aj = old_ai + delta, old_aj + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            else:
                if ai < 0:
                    ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            else:
                if aj > C:
                    aj, ai = C, C + diff
        else:
            delta = (G[i] - G[j]) / quad
            s = old_ai + old_aj
            ai, aj = old_ai - delta, old_aj + delta
            if s > C:
                if ai > C:
                    ai, aj = C, s - C
            else:
                if aj < 0:
                    aj, ai = 0.0, s
            if s > C:
                if aj > C:
                    aj, ai = C, s - C
            else:
                if ai < 0:
                    ai, aj = 0.0, s
        alpha[i], alpha[j] = ai, aj
        d_i = (ai - old_ai) * y[i]
        d_j = (aj - old_aj) * y[j]
        G += (y * K[:, i]) * d_i + (y * K[:, j]) * d_j
        it += 1

    # bias from the free support vectors, falling back to the violation midpoint
    F = y * G  # = f_tilde(x_t) - y_t, where f_tilde omits the bias
    free = (alpha > 0) & (alpha < C)
    if free.any():
        bias = float(np.mean(-F[free]))
    else:
        neg_yG = -y * G
        up = (pos & (alpha < C)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < C))
        hi = np.max(np.where(up, neg_yG, -np.inf))
        lo = np.min(np.where(low, neg_yG, np.inf))
        bias = float((hi + lo) / 2.0)

    support = np.flatnonzero(alpha > 0)
    w = X.T @ (alpha * y) if params.kernel == "linear" else None
    return BinarySvm(
        alpha=alpha,
        bias=bias,
        support=support,
        converged=converged,
        n_iter=it,
        kernel=params.kernel,
        gamma=gamma,
        coef0=params.coef0,
        sv_x=X[support].copy(),
        sv_coef=(alpha * y)[support].copy(),
        w=w,
    )


def dual_objective(K: np.ndarray, y: np.ndarray, alpha: np.ndarray) -> float:
    """Value of the dual being maximized: 1'a - 1/2 a'Qa."""
    q = alpha * y
    return float(alpha.sum() - 0.5 * q @ K @ q)


class SvmModel(TrainedModel):
    """One-vs-one multiclass wrapper over binary solutions."""

    def __init__(self, spec: ModelSpec, classes: tuple[int, ...], n_features_in: int,
                 pairs: list[tuple[int, int]], machines: list[BinarySvm]):
        super().__init__(spec, classes, n_features_in)
        self.pairs = pairs
        self.machines = machines

    def _predict(self, X: np.ndarray) -> np.ndarray:
        k = len(self.classes)
        pos = {c: i for i, c in enumerate(self.classes)}
        votes = np.zeros((X.shape[0], k), dtype=np.int64)
        magnitudes = np.zeros((X.shape[0], k), dtype=np.float64)
        for (a, b), machine in zip(self.pairs, self.machines):
            f = machine.decision(X)
            wins_a = f >= 0.0
            ia, ib = pos[a], pos[b]
            votes[wins_a, ia] += 1
            votes[~wins_a, ib] += 1
            magnitudes[wins_a, ia] += np.abs(f[wins_a])
            magnitudes[~wins_a, ib] += np.abs(f[~wins_a])
        # rank by votes, then summed magnitude of winning decisions, then
        # smaller class code; lexsort is ascending so negate the first two
        winners = np.empty(X.shape[0], dtype=np.int64)
        class_arr = self.class_array()
        for r in range(X.shape[0]):
            order = np.lexsort((class_arr, -magnitudes[r], -votes[r]))
            winners[r] = class_arr[order[0]]
        return winners


def fit_svm(spec: ModelSpec, ds: LabeledDataset) -> SvmModel:
    params: SvmParams = spec.params
    resolved = SvmParams(
        kernel=params.kernel,
        c=params.c,
        gamma=resolve_gamma(params.gamma, ds.features),
        coef0=params.coef0,
        tolerance=params.tolerance,
        max_passes=params.max_passes,
    )
    classes = tuple(ds.present_classes())
    pairs = [(a, b) for i, a in enumerate(classes) for b in classes[i + 1 :]]
    machines = []
    for a, b in pairs:
        rows = np.flatnonzero((ds.labels == a) | (ds.labels == b))
        y = np.where(ds.labels[rows] == a, 1.0, -1.0)
        machines.append(fit_svm_binary(ds.features[rows], y, resolved))
    model = SvmModel(spec, classes, ds.d, pairs, machines)
    model.converged = all(m.converged for m in machines)
    model.fit_info["gamma"] = resolved.gamma
    model.fit_info["pair_iterations"] = [m.n_iter for m in machines]
    return model
