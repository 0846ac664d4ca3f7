"""Model-comparison statistics: Welch's t-test and the 5x2cv paired t-test.

p-values come from an exact Student-t upper tail computed with the
regularized incomplete beta function (continued fraction with symmetry
reduction), so there is no dependency on an external stats library.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import rng
from .data import LabeledDataset, split_half


class StatTestError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Student-t tail probability
# ---------------------------------------------------------------------------

_BETACF_MAX_ITER = 400
_BETACF_EPS = 1e-16
_BETACF_FPMIN = 1e-300


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz's method)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETACF_FPMIN:
        d = _BETACF_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_FPMIN:
            d = _BETACF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETACF_FPMIN:
            c = _BETACF_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_FPMIN:
            d = _BETACF_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETACF_FPMIN:
            c = _BETACF_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    return h  # converged to float precision in practice well before the cap


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) with the symmetry reduction for fast convergence."""
    if a <= 0.0 or b <= 0.0:
        raise StatTestError(f"beta parameters must be positive, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise StatTestError(f"x={x} outside [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_sf(t: float, df: float) -> float:
    """Upper-tail probability P(T > t) for Student's t with ``df`` degrees."""
    if not math.isfinite(t):
        if math.isnan(t):
            raise StatTestError("t statistic is NaN")
        return 0.0 if t > 0 else 1.0
    if df <= 0:
        raise StatTestError(f"degrees of freedom must be positive, got {df}")
    if t == 0.0:
        return 0.5
    x = df / (df + t * t)
    tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, x)
    return tail if t > 0 else 1.0 - tail


def two_tailed_p(t: float, df: float) -> float:
    return min(1.0, 2.0 * t_sf(abs(t), df))


# ---------------------------------------------------------------------------
# Welch's t-test
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScoreSample:
    """Repeated evaluation scores for one model."""

    model_id: str
    scores: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "scores", tuple(float(s) for s in self.scores))

    @property
    def n(self) -> int:
        return len(self.scores)

    def mean(self) -> float:
        return float(np.mean(self.scores))

    def variance(self) -> float:
        return float(np.var(self.scores, ddof=1))


@dataclass(frozen=True)
class TestResult:
    t_value: float
    df: float
    p_value: float
    alpha: float
    reject_null: bool
    method: str
    degenerate: bool = False
    extras: dict = field(default_factory=dict)


def welch_t_test(a: ScoreSample, b: ScoreSample, alpha: float = 0.05) -> TestResult:
    """Two-tailed Welch's t-test on two score samples.

    t uses unbiased sample variances; degrees of freedom follow the
    Welch-Satterthwaite formula.  Zero variance on both sides is flagged
    degenerate: equal means retain the null (t=0, p=1), unequal means reject
    outright.
    """
    if a.n < 2 or b.n < 2:
        raise StatTestError(f"need n >= 2 on both sides, got {a.n} and {b.n}")
    ma, mb = a.mean(), b.mean()
    va, vb = a.variance(), b.variance()
    if va == 0.0 and vb == 0.0:
        if ma == mb:
            return TestResult(0.0, float(a.n + b.n - 2), 1.0, alpha, False, "welch", True)
        t = math.copysign(math.inf, ma - mb)
        return TestResult(t, float(a.n + b.n - 2), 0.0, alpha, True, "welch", True)
    sa, sb = va / a.n, vb / b.n
    t = (ma - mb) / math.sqrt(sa + sb)
    df = (sa + sb) ** 2 / (sa**2 / (a.n - 1) + sb**2 / (b.n - 1))
    p = two_tailed_p(t, df)
    return TestResult(t, df, p, alpha, p < alpha, "welch")


# ---------------------------------------------------------------------------
# 5x2cv paired t-test
# ---------------------------------------------------------------------------

CV52_REPETITIONS = 5


def cv52_statistic(p1: Sequence[float], p2: Sequence[float]) -> tuple[float, float, bool]:
    """Statistic of the 5x2cv paired test from the raw difference table.

    ``p1[i]`` / ``p2[i]`` are the accuracy differences of repetition i on the
    two fold orientations.  Returns (t, df, degenerate);
    t = p1[0] / sqrt(mean of per-repetition variances), df = 5.
    """
    p1 = [float(v) for v in p1]
    p2 = [float(v) for v in p2]
    if len(p1) != CV52_REPETITIONS or len(p2) != CV52_REPETITIONS:
        raise StatTestError("difference table must have exactly 5 repetitions")
    s2 = []
    for d1, d2 in zip(p1, p2):
        mean = 0.5 * (d1 + d2)
        s2.append((d1 - mean) ** 2 + (d2 - mean) ** 2)
    pooled = sum(s2) / CV52_REPETITIONS
    if pooled == 0.0:
        return 0.0, float(CV52_REPETITIONS), True
    return p1[0] / math.sqrt(pooled), float(CV52_REPETITIONS), False


def cv52_paired_t_test(
    spec_a,
    spec_b,
    ds: LabeledDataset,
    seed: int,
    alpha: float = 0.05,
) -> TestResult:
    """Five repetitions of stratified 2-fold CV comparing two model specs.

    Both models are trained on identical halves within each repetition, so
    the per-repetition accuracy differences are paired by construction.  The
    statistic keeps the canonical order sensitivity: its numerator is the
    first repetition's first difference.
    """
    from .classifiers import fit  # deferred: avoids import cycle at package init

    p1, p2 = [], []
    acc_table = []
    for rep in range(CV52_REPETITIONS):
        half_a, half_b = split_half(ds, rng.derive_seed(seed, "cv52_rep", rep))
        accs = {}
        for fold_tag, train, test in (("1", half_a, half_b), ("2", half_b, half_a)):
            for name, spec in (("a", spec_a), ("b", spec_b)):
                model = fit(spec, train)
                pred = model.predict(test.features)
                accs[name + fold_tag] = float(np.mean(pred == test.labels))
        p1.append(accs["a1"] - accs["b1"])
        p2.append(accs["a2"] - accs["b2"])
        acc_table.append(accs)
    t, df, degenerate = cv52_statistic(p1, p2)
    if degenerate:
        return TestResult(
            0.0, df, 1.0, alpha, False, "cv52", True,
            extras={"p1": p1, "p2": p2, "accuracies": acc_table},
        )
    p = two_tailed_p(t, df)
    return TestResult(
        t, df, p, alpha, p < alpha, "cv52",
        extras={"p1": p1, "p2": p2, "accuracies": acc_table},
    )
