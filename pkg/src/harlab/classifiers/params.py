"""Declarative model configuration: one frozen params record per family.

Legal ranges are enforced at construction so a grid of specs can be built
and validated before any training starts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

DECISION_TREE = "decision_tree"
RANDOM_FOREST = "random_forest"
SVM = "svm"
LOGISTIC_REGRESSION = "logistic_regression"
NEURAL_NET = "neural_net"

FAMILIES = (DECISION_TREE, RANDOM_FOREST, SVM, LOGISTIC_REGRESSION, NEURAL_NET)

# short names used in report tables
FAMILY_SHORT = {
    DECISION_TREE: "DT",
    RANDOM_FOREST: "RF",
    SVM: "SVM",
    LOGISTIC_REGRESSION: "LR",
    NEURAL_NET: "ANN",
}

CRITERIA = ("gini", "entropy")
KERNELS = ("linear", "rbf", "sigmoid")
REGULARIZERS = ("l1", "l2")


class ParamError(ValueError):
    pass


def _check_depth(max_depth) -> int | None:
    if max_depth is None:
        return None
    d = int(max_depth)
    if d < 1:
        raise ParamError(f"max_depth must be None (unbounded) or >= 1, got {max_depth}")
    return d


@dataclass(frozen=True)
class TreeParams:
    criterion: str = "gini"
    max_depth: int | None = None

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ParamError(f"criterion {self.criterion!r} not in {CRITERIA}")
        object.__setattr__(self, "max_depth", _check_depth(self.max_depth))


@dataclass(frozen=True)
class ForestParams:
    criterion: str = "gini"
    n_estimators: int = 90
    max_depth: int | None = None
    features_per_split: int | None = None  # None: floor(sqrt(D)) at fit time

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ParamError(f"criterion {self.criterion!r} not in {CRITERIA}")
        if self.n_estimators < 1:
            raise ParamError(f"n_estimators must be >= 1, got {self.n_estimators}")
        object.__setattr__(self, "max_depth", _check_depth(self.max_depth))
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ParamError("features_per_split must be >= 1 when given")


@dataclass(frozen=True)
class SvmParams:
    kernel: str = "linear"
    c: float = 1.0
    gamma: float | None = None  # None: 1 / (D * mean feature variance)
    coef0: float = 0.0
    tolerance: float = 1e-3
    max_passes: int = 200

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise ParamError(f"kernel {self.kernel!r} not in {KERNELS}")
        if self.c <= 0:
            raise ParamError(f"penalty c must be positive, got {self.c}")
        if self.gamma is not None and self.gamma <= 0:
            raise ParamError(f"gamma must be positive when given, got {self.gamma}")
        if self.tolerance <= 0:
            raise ParamError("tolerance must be positive")
        if self.max_passes < 1:
            raise ParamError("max_passes must be >= 1")


@dataclass(frozen=True)
class LogRegParams:
    regularizer: str = "l2"
    c: float = 1.0
    max_iter: int = 500
    tolerance: float = 1e-6

    def __post_init__(self):
        if self.regularizer not in REGULARIZERS:
            raise ParamError(f"regularizer {self.regularizer!r} not in {REGULARIZERS}")
        if self.c <= 0:
            raise ParamError(f"penalty c must be positive, got {self.c}")
        if self.max_iter < 1:
            raise ParamError("max_iter must be >= 1")
        if self.tolerance <= 0:
            raise ParamError("tolerance must be positive")


@dataclass(frozen=True)
class MlpParams:
    """Single hidden layer by default; deeper stacks exist only for the
    hidden-layer diagnostic sweep."""

    hidden_sizes: tuple[int, ...] = (50,)
    alpha: float = 1e-4
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    max_epochs: int = 200
    batch_size: int | None = None  # None: min(200, N)
    shuffle_each_epoch: bool = True
    tol: float = 1e-4
    n_iter_no_change: int = 10

    def __post_init__(self):
        sizes = tuple(int(h) for h in self.hidden_sizes)
        if not sizes or any(h < 1 for h in sizes):
            raise ParamError(f"hidden_sizes must be positive, got {self.hidden_sizes}")
        object.__setattr__(self, "hidden_sizes", sizes)
        if self.alpha < 0:
            raise ParamError("alpha must be non-negative")
        if self.learning_rate <= 0:
            raise ParamError("learning_rate must be positive")
        for name, v in (("beta1", self.beta1), ("beta2", self.beta2)):
            if not 0.0 < v < 1.0:
                raise ParamError(f"{name} must lie in (0, 1), got {v}")
        if self.max_epochs < 1:
            raise ParamError("max_epochs must be >= 1")
        if self.batch_size is not None and self.batch_size < 1:
            raise ParamError("batch_size must be >= 1 when given")
        if self.tol < 0:
            raise ParamError("tol must be non-negative")
        if self.n_iter_no_change < 1:
            raise ParamError("n_iter_no_change must be >= 1")


_PARAMS_BY_FAMILY = {
    DECISION_TREE: TreeParams,
    RANDOM_FOREST: ForestParams,
    SVM: SvmParams,
    LOGISTIC_REGRESSION: LogRegParams,
    NEURAL_NET: MlpParams,
}


@dataclass(frozen=True)
class ModelSpec:
    """A classifier family, its validated parameters, and a training seed."""

    family: str
    params: object
    seed: int = 0

    def __post_init__(self):
        if self.family not in _PARAMS_BY_FAMILY:
            raise ParamError(f"unknown family {self.family!r}")
        expected = _PARAMS_BY_FAMILY[self.family]
        if not isinstance(self.params, expected):
            raise ParamError(
                f"family {self.family} expects {expected.__name__}, "
                f"got {type(self.params).__name__}"
            )

    @property
    def short_name(self) -> str:
        return FAMILY_SHORT[self.family]


def params_class(family: str):
    try:
        return _PARAMS_BY_FAMILY[family]
    except KeyError:
        raise ParamError(f"unknown family {family!r}") from None
