"""One-way ANOVA F-value feature ranking and top-k selection."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import LabeledDataset


class FeatureSelectError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureScore:
    """ANOVA F ratio for one feature.

    ``infinite`` marks the degenerate case of zero within-group variance with
    nonzero between-group variance; the flag (not a float infinity) keeps
    sorting and serialization exact.  A feature constant everywhere scores 0.
    """

    feature_index: int
    f_value: float
    infinite: bool
    df_between: int
    df_within: int

    def sort_key(self) -> tuple:
        # descending score, infinity above everything, ties to the lower index
        return (0 if self.infinite else 1, -self.f_value, self.feature_index)


def anova_f_scores(ds: LabeledDataset) -> list[FeatureScore]:
    """Between-group over within-group variance ratio, one score per feature.

    F = [sum_g n_g (mean_g - mean)^2 / (k-1)] / [sum_g sum_i (x_gi - mean_g)^2 / (N-k)]
    """
    classes = ds.present_classes()
    k = len(classes)
    n = ds.n
    if k < 2:
        raise FeatureSelectError(f"need at least 2 classes, found {k}")
    if n <= k:
        raise FeatureSelectError(f"need more rows ({n}) than classes ({k})")
    X = ds.features
    grand_mean = X.mean(axis=0)
    ss_between = np.zeros(ds.d)
    ss_within = np.zeros(ds.d)
    for c in classes:
        grp = X[ds.labels == c]
        grp_mean = grp.mean(axis=0)
        ss_between += grp.shape[0] * (grp_mean - grand_mean) ** 2
        ss_within += ((grp - grp_mean) ** 2).sum(axis=0)
    ms_between = ss_between / (k - 1)
    ms_within = ss_within / (n - k)

    scores = []
    for j in range(ds.d):
        if ms_within[j] == 0.0:
            if ms_between[j] > 0.0:
                scores.append(FeatureScore(j, 0.0, True, k - 1, n - k))
            else:
                # constant feature: no class information, ranks last
                scores.append(FeatureScore(j, 0.0, False, k - 1, n - k))
        else:
            scores.append(
                FeatureScore(j, float(ms_between[j] / ms_within[j]), False, k - 1, n - k)
            )
    return scores


def select_top_k(scores: list[FeatureScore], k: int) -> list[int]:
    """Indices of the k best-scoring features, in descending-score order.

    Infinite scores sort above all finite ones; equal scores break toward the
    lower feature index, so the selection is a deterministic total order and
    top-k is always a prefix of top-(k+1).
    """
    if not 1 <= k <= len(scores):
        raise FeatureSelectError(f"k={k} outside 1..{len(scores)}")
    ranked = sorted(scores, key=FeatureScore.sort_key)
    return [s.feature_index for s in ranked[:k]]


SWEEP_FEATURE_COUNTS = (100, 200, 300, 400, 500, 561)


def export_scores_csv(
    scores: list[FeatureScore], feature_names: tuple[str, ...], path: str | Path
) -> None:
    """Write (feature_index, feature_name, f_value, rank) rows, best first."""
    ranked = sorted(scores, key=FeatureScore.sort_key)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature_index", "feature_name", "f_value", "rank"])
        for rank, s in enumerate(ranked, start=1):
            value = "inf" if s.infinite else repr(s.f_value)
            writer.writerow([s.feature_index, feature_names[s.feature_index], value, rank])
