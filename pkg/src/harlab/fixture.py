"""Bundled synthetic dataset so the full pipeline runs without the UCI download.

Six seeded Gaussian clusters over 20 features, clipped to the [-1, 1] range
the loader enforces.  Feature 0 is named like the body-acceleration-magnitude
mean feature and is constructed to separate static from dynamic activities,
so the explore stage exercises its real code path.  Eight of the 20 features
are pure noise, which gives the ANOVA ranking something to discard.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import rng
from .data import DYNAMIC_ACTIVITIES, LabeledDataset

FIXTURE_FEATURES = 20
_INFORMATIVE = 12
_NOISE_SCALE = 0.16
_MEAN_SCALE = 0.45


def fixture_feature_names() -> tuple[str, ...]:
    names = ["tBodyAccMag-mean()"]
    names += [f"syn-feat-{i:02d}" for i in range(1, FIXTURE_FEATURES)]
    return tuple(names)


def _class_means(seed: int) -> np.ndarray:
    means = np.zeros((6, FIXTURE_FEATURES))
    raw = rng.uniform(rng.derive_seed(seed, "fixture_means"), 6 * (_INFORMATIVE - 1))
    means[:, 1:_INFORMATIVE] = (raw.reshape(6, _INFORMATIVE - 1) * 2.0 - 1.0) * _MEAN_SCALE
    for c in range(1, 7):
        means[c - 1, 0] = 0.35 if c in [int(a) for a in DYNAMIC_ACTIVITIES] else -0.55
    return means


def make_fixture(
    seed: int = 2023, n_train: int = 420, n_test: int = 180
) -> tuple[LabeledDataset, LabeledDataset]:
    """Deterministic (train, test) pair with near-balanced classes."""
    means = _class_means(seed)
    train = _make_split(means, n_train, rng.derive_seed(seed, "fixture_train"))
    test = _make_split(means, n_test, rng.derive_seed(seed, "fixture_test"))
    return train, test


def _make_split(means: np.ndarray, n: int, seed: int) -> LabeledDataset:
    labels = np.arange(n) % 6 + 1
    noise = rng.normal(rng.derive_seed(seed, "noise"), n * FIXTURE_FEATURES)
    X = means[labels - 1] + noise.reshape(n, FIXTURE_FEATURES) * _NOISE_SCALE
    np.clip(X, -1.0, 1.0, out=X)
    subjects = np.arange(n) % 30 + 1
    return LabeledDataset(X, labels, subjects, fixture_feature_names())


def write_uci_layout(train: LabeledDataset, test: LabeledDataset, root: str | Path) -> Path:
    """Materialize a dataset pair in the published UCI directory layout.

    Feature values are written in scientific notation with run-of-spaces
    separators, matching the texture of the real files.
    """
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "features.txt", "w", encoding="utf-8") as fh:
        for i, name in enumerate(train.feature_names, start=1):
            fh.write(f"{i} {name}\n")
    for split, ds in (("train", train), ("test", test)):
        d = root / split
        d.mkdir(parents=True, exist_ok=True)
        with open(d / f"X_{split}.txt", "w", encoding="utf-8") as fh:
            for row in ds.features:
                fh.write(" ".join(f"{v: .7e}" for v in row) + "\n")
        np.savetxt(d / f"y_{split}.txt", ds.labels, fmt="%d")
        np.savetxt(d / f"subject_{split}.txt", ds.subjects, fmt="%d")
    return root
