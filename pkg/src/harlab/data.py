"""Dataset types, the UCI-layout loader, and seeded resampling primitives.

Everything here is immutable after construction and every resampling
operation is a pure function of (dataset, parameters, seed), so splits can be
recomputed or parallelized without coordination.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

import numpy as np

from . import rng


class Activity(IntEnum):
    """The six activity codes with their fixed names."""

    WALKING = 1
    WALKING_UPSTAIRS = 2
    WALKING_DOWNSTAIRS = 3
    SITTING = 4
    STANDING = 5
    LAYING = 6

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_name(cls, name: str) -> "Activity":
        return cls[name.strip().upper()]


ACTIVITY_CODES = tuple(int(a) for a in Activity)

# Activities 1-3 involve motion; 4-6 are postures.
DYNAMIC_ACTIVITIES = (Activity.WALKING, Activity.WALKING_UPSTAIRS, Activity.WALKING_DOWNSTAIRS)
STATIC_ACTIVITIES = (Activity.SITTING, Activity.STANDING, Activity.LAYING)

HAR_FEATURE_COUNT = 561
HAR_TOTAL_RECORDS = 10299


class DataError(ValueError):
    """Raised for malformed input files or invariant violations."""


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix plus aligned activity labels and subject ids.

    ``features`` is N x D float64, ``labels`` and ``subjects`` are length-N
    int64 vectors, ``feature_names`` has length D.  Construction validates
    shape agreement, finiteness, and the 1..6 label range.
    """

    features: np.ndarray
    labels: np.ndarray
    subjects: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        s = np.asarray(self.subjects, dtype=np.int64)
        if X.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {X.shape}")
        n, d = X.shape
        if y.shape != (n,):
            raise DataError(f"labels length {y.shape} != number of rows {n}")
        if s.shape != (n,):
            raise DataError(f"subjects length {s.shape} != number of rows {n}")
        if len(self.feature_names) != d:
            raise DataError(
                f"{len(self.feature_names)} feature names for {d} feature columns"
            )
        if not np.isfinite(X).all():
            bad = np.argwhere(~np.isfinite(X))[0]
            raise DataError(f"non-finite feature value at row {bad[0]}, column {bad[1]}")
        if n and (y.min() < 1 or y.max() > 6):
            bad_i = int(np.flatnonzero((y < 1) | (y > 6))[0])
            raise DataError(f"label {y[bad_i]} at row {bad_i} outside 1..6")
        X.setflags(write=False)
        y.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "subjects", s)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> dict[int, int]:
        return {c: int(np.sum(self.labels == c)) for c in ACTIVITY_CODES}

    def present_classes(self) -> list[int]:
        return [c for c, k in self.class_counts().items() if k > 0]

    def take(self, indices: np.ndarray) -> "LabeledDataset":
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(
            self.features[idx], self.labels[idx], self.subjects[idx], self.feature_names
        )

    def select_features(self, indices) -> "LabeledDataset":
        idx = np.asarray(list(indices), dtype=np.int64)
        return LabeledDataset(
            self.features[:, idx],
            self.labels,
            self.subjects,
            tuple(self.feature_names[i] for i in idx),
        )

    def check_har_ranges(self) -> None:
        """HAR feature files are normalized to [-1, 1]; reject anything else."""
        X = self.features
        if X.size and (X.min() < -1.0 or X.max() > 1.0):
            bad = np.argwhere((X < -1.0) | (X > 1.0))[0]
            raise DataError(
                f"feature value {X[bad[0], bad[1]]} at row {bad[0]}, column {bad[1]} "
                "outside [-1, 1]"
            )


def concatenate(a: LabeledDataset, b: LabeledDataset) -> LabeledDataset:
    if a.feature_names != b.feature_names:
        raise DataError("cannot concatenate datasets with different feature names")
    return LabeledDataset(
        np.vstack([a.features, b.features]),
        np.concatenate([a.labels, b.labels]),
        np.concatenate([a.subjects, b.subjects]),
        a.feature_names,
    )


# ---------------------------------------------------------------------------
# UCI directory layout parsing
# ---------------------------------------------------------------------------


def _parse_matrix(path: Path, expect_cols: int | None = None) -> np.ndarray:
    """Whitespace-separated float matrix with file/line error reporting.

    Accepts fixed or scientific notation and any run of spaces or tabs.  Fast
    path converts all rows at once; on failure we re-scan row by row to name
    the offending line (1-based).
    """
    rows: list[list[str]] = []
    ncols = expect_cols
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            fields = line.split()
            if not fields:
                continue
            if ncols is None:
                ncols = len(fields)
            if len(fields) != ncols:
                raise DataError(
                    f"{path}:{lineno}: expected {ncols} columns, found {len(fields)}"
                )
            rows.append(fields)
    if not rows:
        raise DataError(f"{path}: file contains no data rows")
    try:
        return np.array(rows, dtype=np.float64)
    except ValueError:
        for lineno, fields in enumerate(rows, start=1):
            for col, tok in enumerate(fields):
                try:
                    float(tok)
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: unparsable number {tok!r} in column {col}"
                    ) from None
        raise DataError(f"{path}: failed to parse numeric data") from None


def _parse_int_column(path: Path, lo: int, hi: int, what: str) -> np.ndarray:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            tok = line.strip()
            if not tok:
                continue
            try:
                v = int(tok)
            except ValueError:
                raise DataError(f"{path}:{lineno}: unparsable {what} {tok!r}") from None
            if not lo <= v <= hi:
                raise DataError(f"{path}:{lineno}: {what} {v} outside {lo}..{hi}")
            out.append(v)
    if not out:
        raise DataError(f"{path}: file contains no values")
    return np.array(out, dtype=np.int64)


def _find_file(directory: Path, patterns: list[str], what: str) -> Path:
    for pat in patterns:
        hits = sorted(directory.glob(pat))
        if hits:
            return hits[0]
    raise DataError(f"missing {what} file in {directory} (tried {', '.join(patterns)})")


def _read_feature_names(split_dir: Path) -> tuple[str, ...]:
    for d in (split_dir, split_dir.parent):
        cand = d / "features.txt"
        if cand.exists():
            names = []
            with open(cand, "r", encoding="utf-8") as fh:
                for line in fh:
                    parts = line.split()
                    if not parts:
                        continue
                    # lines are "<index> <name>"; bare names also accepted
                    names.append(parts[1] if len(parts) > 1 and parts[0].isdigit() else parts[0])
            if not names:
                raise DataError(f"{cand}: no feature names found")
            return tuple(names)
    raise DataError(f"missing features.txt in {split_dir} or its parent")


def _load_split_dir(directory: Path, use_cache: bool) -> LabeledDataset:
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError(f"dataset directory {directory} does not exist")
    cache_path = directory / "harlab_cache.bin"
    if use_cache and cache_path.exists():
        try:
            return load_cache(cache_path)
        except DataError:
            pass  # stale or corrupt cache: fall through to re-parse

    x_path = _find_file(directory, ["X_*.txt", "X*.txt"], "feature matrix")
    y_path = _find_file(directory, ["y_*.txt", "y*.txt"], "label")
    s_path = _find_file(directory, ["subject_*.txt", "subject*.txt"], "subject")
    names = _read_feature_names(directory)

    X = _parse_matrix(x_path, expect_cols=len(names))
    y = _parse_int_column(y_path, 1, 6, "label")
    s = _parse_int_column(s_path, 1, 30, "subject id")
    if X.shape[0] != y.shape[0] or X.shape[0] != s.shape[0]:
        raise DataError(
            f"{directory}: row counts disagree: features {X.shape[0]}, "
            f"labels {y.shape[0]}, subjects {s.shape[0]}"
        )
    ds = LabeledDataset(X, y, s, names)
    ds.check_har_ranges()
    if use_cache:
        try:
            save_cache(ds, cache_path)
        except OSError:
            pass  # read-only dataset directory: cache is optional
    return ds


def load_har_split(
    train_dir: str | Path, test_dir: str | Path, use_cache: bool = True
) -> tuple[LabeledDataset, LabeledDataset]:
    """Load the published train/test directories into validated datasets.

    The publisher pre-split the 10299 records roughly 70/30; we report the
    actual counts and never re-split.
    """
    train = _load_split_dir(Path(train_dir), use_cache)
    test = _load_split_dir(Path(test_dir), use_cache)
    if train.feature_names != test.feature_names:
        raise DataError("train and test splits disagree on feature names")
    return train, test


# ---------------------------------------------------------------------------
# Columnar cache: versioned header, little-endian float64, byte-deterministic
# ---------------------------------------------------------------------------

_CACHE_MAGIC = b"HARLABC1"
_CACHE_VERSION = 1


def save_cache(ds: LabeledDataset, path: str | Path) -> None:
    names_blob = b"".join(
        struct.pack("<I", len(nb)) + nb
        for nb in (name.encode("utf-8") for name in ds.feature_names)
    )
    payload = (
        struct.pack("<IQQ", _CACHE_VERSION, ds.n, ds.d)
        + struct.pack("<I", len(ds.feature_names))
        + names_blob
        + np.ascontiguousarray(ds.features, dtype="<f8").tobytes()
        + np.ascontiguousarray(ds.labels, dtype="<i8").tobytes()
        + np.ascontiguousarray(ds.subjects, dtype="<i8").tobytes()
    )
    crc = zlib.crc32(payload)
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC + payload + struct.pack("<I", crc))


def load_cache(path: str | Path) -> LabeledDataset:
    raw = Path(path).read_bytes()
    if len(raw) < len(_CACHE_MAGIC) + 24 or raw[: len(_CACHE_MAGIC)] != _CACHE_MAGIC:
        raise DataError(f"{path}: not a harlab cache file")
    payload, crc_bytes = raw[len(_CACHE_MAGIC) : -4], raw[-4:]
    if zlib.crc32(payload) != struct.unpack("<I", crc_bytes)[0]:
        raise DataError(f"{path}: cache checksum mismatch")
    version, n, d = struct.unpack_from("<IQQ", payload, 0)
    if version != _CACHE_VERSION:
        raise DataError(f"{path}: unsupported cache version {version}")
    off = 20
    (n_names,) = struct.unpack_from("<I", payload, off)
    off += 4
    names = []
    for _ in range(n_names):
        (ln,) = struct.unpack_from("<I", payload, off)
        off += 4
        names.append(payload[off : off + ln].decode("utf-8"))
        off += ln
    X = np.frombuffer(payload, dtype="<f8", count=n * d, offset=off).reshape(n, d)
    off += 8 * n * d
    y = np.frombuffer(payload, dtype="<i8", count=n, offset=off)
    off += 8 * n
    s = np.frombuffer(payload, dtype="<i8", count=n, offset=off)
    return LabeledDataset(X.copy(), y.copy(), s.copy(), tuple(names))


# ---------------------------------------------------------------------------
# Seeded, stratified resampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of every row to one of k folds, stratified by label."""

    k: int
    assignments: np.ndarray
    seed: int

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=np.int64)
        if self.k < 2:
            raise DataError(f"fold count {self.k} must be >= 2")
        if a.size and (a.min() < 0 or a.max() >= self.k):
            raise DataError("fold assignment outside 0..k-1")
        counts = np.bincount(a, minlength=self.k)
        if (counts == 0).any():
            raise DataError(f"fold {int(np.flatnonzero(counts == 0)[0])} is empty")
        a.setflags(write=False)
        object.__setattr__(self, "assignments", a)

    def fold_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def digest(self) -> str:
        import hashlib

        h = hashlib.sha256()
        h.update(struct.pack("<IQ", self.k, self.seed & 0xFFFFFFFFFFFFFFFF))
        h.update(np.ascontiguousarray(self.assignments, dtype="<i8").tobytes())
        return h.hexdigest()


def _class_indices(ds: LabeledDataset) -> list[tuple[int, np.ndarray]]:
    return [
        (c, np.flatnonzero(ds.labels == c))
        for c in ACTIVITY_CODES
        if np.any(ds.labels == c)
    ]


def stratified_kfold(ds: LabeledDataset, k: int, seed: int) -> FoldPlan:
    """Assign rows to k folds so per-class counts differ by at most one.

    Rows of each class are dealt round-robin after a seeded shuffle; the
    starting fold rotates with the running total so overall fold sizes stay
    balanced too.
    """
    if k < 2:
        raise DataError(f"fold count {k} must be >= 2")
    assignments = np.full(ds.n, -1, dtype=np.int64)
    offset = 0
    op_seed = rng.derive_seed(seed, "stratified_kfold")
    for c, idx in _class_indices(ds):
        if idx.size < k:
            raise DataError(
                f"class {c} ({Activity(c).label}) has {idx.size} rows, fewer than k={k}"
            )
        order = rng.permutation(rng.derive_seed(op_seed, c), idx.size)
        assignments[idx[order]] = (np.arange(idx.size) + offset) % k
        offset = (offset + idx.size) % k
    return FoldPlan(k=k, assignments=assignments, seed=seed)


def _subsample_targets(counts: list[tuple[int, int]], fraction: float) -> dict[int, int]:
    """Largest-remainder rounding of per-class targets.

    Base target is floor(fraction * n_c); leftover rows up to
    floor(fraction * N) go to the classes with the largest fractional parts,
    ties broken by smaller class code.
    """
    total = sum(n for _, n in counts)
    grand_target = int(np.floor(fraction * total + 1e-9))
    base = {}
    fracs = []
    for c, n in counts:
        exact = fraction * n
        b = int(np.floor(exact + 1e-9))
        base[c] = b
        fracs.append((-(exact - b), c))
    remainder = grand_target - sum(base.values())
    for _, c in sorted(fracs)[:remainder]:
        base[c] += 1
    return base


def stratified_subsample(ds: LabeledDataset, fraction: float, seed: int) -> LabeledDataset:
    """Sample a class-proportional subset without replacement.

    Deterministic given the seed; rows keep their original dataset order.
    """
    if not 0.0 < fraction <= 1.0:
        raise DataError(f"fraction {fraction} outside (0, 1]")
    classes = _class_indices(ds)
    targets = _subsample_targets([(c, idx.size) for c, idx in classes], fraction)
    op_seed = rng.derive_seed(seed, "stratified_subsample")
    keep: list[np.ndarray] = []
    for c, idx in classes:
        t = targets[c]
        if t < 1:
            raise DataError(
                f"fraction {fraction} selects no rows for class {c} ({Activity(c).label})"
            )
        order = rng.permutation(rng.derive_seed(op_seed, c), idx.size)
        keep.append(idx[order[:t]])
    return ds.take(np.sort(np.concatenate(keep)))


def split_half(ds: LabeledDataset, seed: int) -> tuple[LabeledDataset, LabeledDataset]:
    """Stratified disjoint halves whose union is the dataset.

    Odd class counts round the extra row into the first half, so half sizes
    differ by at most the number of classes.
    """
    op_seed = rng.derive_seed(seed, "split_half")
    first: list[np.ndarray] = []
    second: list[np.ndarray] = []
    for c, idx in _class_indices(ds):
        if idx.size < 2:
            raise DataError(
                f"class {c} ({Activity(c).label}) has a single row; cannot halve"
            )
        order = rng.permutation(rng.derive_seed(op_seed, c), idx.size)
        cut = (idx.size + 1) // 2
        first.append(idx[order[:cut]])
        second.append(idx[order[cut:]])
    a = ds.take(np.sort(np.concatenate(first)))
    b = ds.take(np.sort(np.concatenate(second)))
    return a, b
