"""Confusion-matrix evaluation: accuracy, per-class precision/recall/F1.

Per-class scores are one-vs-rest counts read off the confusion matrix.  Any
score whose denominator is zero reports 0.0 and is flagged as undefined
rather than raising, so whole-grid evaluations stay total.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    """counts[i][j] = number of samples with true class_order[i] predicted class_order[j]."""

    counts: np.ndarray
    class_order: tuple[int, ...]

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        k = len(self.class_order)
        if c.shape != (k, k):
            raise MetricError(f"counts shape {c.shape} does not match {k} classes")
        if c.size and c.min() < 0:
            raise MetricError("negative count in confusion matrix")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)
        object.__setattr__(self, "class_order", tuple(self.class_order))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def index_of(self, label: int) -> int:
        try:
            return self.class_order.index(label)
        except ValueError:
            raise MetricError(f"label {label} not in class order {self.class_order}") from None


def confusion_matrix(y_true, y_pred, class_order) -> ConfusionMatrix:
    yt = np.asarray(y_true).ravel()
    yp = np.asarray(y_pred).ravel()
    if yt.shape != yp.shape:
        raise MetricError(f"length mismatch: {yt.shape[0]} true vs {yp.shape[0]} predicted")
    order = tuple(int(c) for c in class_order)
    pos = {c: i for i, c in enumerate(order)}
    k = len(order)
    counts = np.zeros((k, k), dtype=np.int64)
    for t, p in zip(yt.tolist(), yp.tolist()):
        if t not in pos:
            raise MetricError(f"unknown true label {t}")
        if p not in pos:
            raise MetricError(f"unknown predicted label {p}")
        counts[pos[t], pos[p]] += 1
    return ConfusionMatrix(counts, order)


def accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise MetricError("empty confusion matrix")
    return float(np.trace(cm.counts)) / cm.total


def _one_vs_rest(cm: ConfusionMatrix, label: int) -> tuple[int, int, int]:
    i = cm.index_of(label)
    tp = int(cm.counts[i, i])
    fp = int(cm.counts[:, i].sum()) - tp
    fn = int(cm.counts[i, :].sum()) - tp
    return tp, fp, fn


def precision_recall_f1(cm: ConfusionMatrix, label: int) -> tuple[float, float, float]:
    """One-vs-rest precision, recall, and their harmonic mean.

    Zero denominators yield 0.0; ``class_scores`` exposes the undefined flags.
    """
    p, r, f1, _ = _prf_flagged(cm, label)
    return p, r, f1


def _prf_flagged(cm: ConfusionMatrix, label: int) -> tuple[float, float, float, set]:
    tp, fp, fn = _one_vs_rest(cm, label)
    undefined = set()
    if tp + fp == 0:
        precision = 0.0
        undefined.add("precision")
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0:
        recall = 0.0
        undefined.add("recall")
    else:
        recall = tp / (tp + fn)
    if precision + recall == 0.0:
        f1 = 0.0
        undefined.add("f1")
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return precision, recall, f1, undefined


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float
    undefined: tuple[str, ...] = ()


@dataclass(frozen=True)
class ClassReport:
    """Per-class scores plus overall accuracy and macro averages."""

    per_class: dict[int, ClassScores]
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float


def class_report(cm: ConfusionMatrix) -> ClassReport:
    per_class = {}
    for label in cm.class_order:
        p, r, f1, undef = _prf_flagged(cm, label)
        per_class[label] = ClassScores(p, r, f1, tuple(sorted(undef)))
    k = len(cm.class_order)
    return ClassReport(
        per_class=per_class,
        accuracy=accuracy(cm),
        macro_precision=sum(s.precision for s in per_class.values()) / k,
        macro_recall=sum(s.recall for s in per_class.values()) / k,
        macro_f1=sum(s.f1 for s in per_class.values()) / k,
    )


def average_reports(reports: list[ClassReport]) -> ClassReport:
    """Mean of per-class and aggregate scores across evaluation folds.

    Undefined flags propagate as the union over folds; the underlying zeros
    participate in the average.
    """
    if not reports:
        raise MetricError("no reports to average")
    labels = list(reports[0].per_class.keys())
    n = len(reports)
    per_class = {}
    for label in labels:
        scores = [r.per_class[label] for r in reports]
        undef = sorted(set().union(*(s.undefined for s in scores)))
        per_class[label] = ClassScores(
            precision=sum(s.precision for s in scores) / n,
            recall=sum(s.recall for s in scores) / n,
            f1=sum(s.f1 for s in scores) / n,
            undefined=tuple(undef),
        )
    return ClassReport(
        per_class=per_class,
        accuracy=sum(r.accuracy for r in reports) / n,
        macro_precision=sum(r.macro_precision for r in reports) / n,
        macro_recall=sum(r.macro_recall for r in reports) / n,
        macro_f1=sum(r.macro_f1 for r in reports) / n,
    )
