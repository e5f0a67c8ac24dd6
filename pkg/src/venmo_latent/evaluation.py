"""Class balancing, stratified folds, leakage-free cross-validation and grid search."""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from sklearn.model_selection import StratifiedKFold

from venmo_latent.classifiers import Model, Trainer, get_trainer
from venmo_latent.config import GridDefaults, LatentConfig
from venmo_latent.errors import SingleClass, TooFewSamples
from venmo_latent.label import ClassLabel, LabeledUser
from venmo_latent.pipeline import FeaturePipeline, PipelineSettings, UserDocument

logger = logging.getLogger(__name__)


def balance_classes(labeled: Sequence[LabeledUser], seed: int) -> list[LabeledUser]:
    """Downsample the majority class, uniformly without replacement, to the minority size."""
    counts = Counter(user.label for user in labeled)
    if len(counts) < 2:
        raise SingleClass(f"cannot balance {len(labeled)} users with a single class")
    minority = min(counts.values())
    rng = np.random.default_rng(seed)
    keep: set[int] = set()
    for label in sorted(counts):
        indices = [i for i, user in enumerate(labeled) if user.label == label]
        if len(indices) > minority:
            indices = rng.choice(indices, size=minority, replace=False).tolist()
        keep.update(indices)
    return [user for i, user in enumerate(labeled) if i in keep]


@dataclass(frozen=True)
class FoldPlan:
    folds: tuple[tuple[int, ...], ...]
    seed: int

    @property
    def k(self) -> int:
        return len(self.folds)

    def train_indices(self, fold: int) -> np.ndarray:
        held_out = set(self.folds[fold])
        n = sum(len(f) for f in self.folds)
        return np.asarray([i for i in range(n) if i not in held_out], dtype=np.int64)

    def test_indices(self, fold: int) -> np.ndarray:
        return np.asarray(self.folds[fold], dtype=np.int64)


def stratified_kfold(labels: Sequence[Any] | np.ndarray, k: int, seed: int) -> FoldPlan:
    labels = np.asarray(labels)
    if k < 2:
        raise TooFewSamples(f"need at least 2 folds, got {k}")
    counts = Counter(labels.tolist())
    smallest = min(counts.values()) if counts else 0
    if smallest < k:
        raise TooFewSamples(f"{k} folds need at least {k} samples per class, smallest class has {smallest}")
    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)
    folds = tuple(
        tuple(sorted(int(i) for i in test)) for _, test in splitter.split(np.zeros(len(labels)), labels)
    )
    return FoldPlan(folds=folds, seed=seed)


@dataclass(frozen=True)
class GridPoint:
    classifier: str
    vectorizer: str
    n_range: tuple[int, int]
    C: float | None = None
    overrides: tuple[tuple[str, Any], ...] = ()

    @property
    def key(self) -> str:
        parts = [self.classifier, self.vectorizer, f"{self.n_range[0]}-{self.n_range[1]}"]
        if self.C is not None:
            parts.append(f"C={self.C:g}")
        parts.extend(f"{name}={value}" for name, value in self.overrides)
        return "|".join(parts)

    def trainer(self, config: LatentConfig) -> Trainer:
        section = {"svm": config.svm, "mlp": config.mlp, "gbdt": config.gbdt}[self.classifier]
        hyperparameters = section.model_dump()
        if self.C is not None:
            hyperparameters["C"] = self.C
        hyperparameters.update(dict(self.overrides))
        return get_trainer(self.classifier, **hyperparameters)

    def pipeline_settings(self, base: PipelineSettings) -> PipelineSettings:
        return PipelineSettings(**{**base.to_dict(), "vectorizer": self.vectorizer, "n_range": self.n_range})


def expand_grid(grid: GridDefaults) -> list[GridPoint]:
    """Enumerate grid configs in a fixed order; the C axis only applies to the SVM."""
    points: list[GridPoint] = []
    for classifier in grid.classifier:
        overrides = tuple(sorted(grid.overrides.get(classifier, {}).items()))
        for vectorizer in grid.vectorizer:
            for n_range in grid.n_range:
                values: list[float | None] = list(grid.C) if classifier == "svm" else [None]
                for C in values:
                    points.append(GridPoint(classifier, vectorizer, tuple(n_range), C, overrides))
    if not points:
        raise ValueError("grid is empty")
    return points


@dataclass
class Confusion:
    tp: int = 0
    fn: int = 0
    fp: int = 0
    tn: int = 0

    def add(self, truth: np.ndarray, predicted: np.ndarray) -> None:
        self.tp += int(np.sum(truth & predicted))
        self.fn += int(np.sum(truth & ~predicted))
        self.fp += int(np.sum(~truth & predicted))
        self.tn += int(np.sum(~truth & ~predicted))

    def merge(self, other: "Confusion") -> None:
        self.tp += other.tp
        self.fn += other.fn
        self.fp += other.fp
        self.tn += other.tn

    def to_dict(self) -> dict[str, int]:
        return {"tp": self.tp, "fn": self.fn, "fp": self.fp, "tn": self.tn}


@dataclass
class FoldResult:
    accuracy: float
    confusion: Confusion


@dataclass
class ConfigResult:
    point: GridPoint
    hyperparameters: dict[str, Any]
    fold_accuracies: list[float]
    confusion: Confusion

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.fold_accuracies))

    def to_dict(self) -> dict[str, Any]:
        return {
            "key": self.point.key,
            "classifier": self.point.classifier,
            "vectorizer": self.point.vectorizer,
            "n_range": list(self.point.n_range),
            "hyperparameters": self.hyperparameters,
            "fold_accuracies": self.fold_accuracies,
            "mean_accuracy": self.mean_accuracy,
            "confusion": self.confusion.to_dict(),
        }


@dataclass
class FittedModel:
    model: Model
    pipeline: FeaturePipeline


def _model_seed(models_seed: int, config_index: int, fold_index: int) -> int:
    return int(np.random.SeedSequence([models_seed, config_index, fold_index]).generate_state(1)[0])


def fit_model(
    documents: Sequence[UserDocument],
    positive: np.ndarray,
    trainer: Trainer,
    settings: PipelineSettings,
    seed: int,
) -> FittedModel:
    pipeline = FeaturePipeline(settings)
    X = pipeline.fit_transform(documents)
    model = trainer.fit(X, positive, seed=seed, metadata=pipeline.feature_metadata)
    return FittedModel(model, pipeline)


def evaluate_fold(
    documents: Sequence[UserDocument],
    positive: np.ndarray,
    plan: FoldPlan,
    fold: int,
    trainer: Trainer,
    settings: PipelineSettings,
    seed: int,
) -> FoldResult:
    """Fit every component on the training rows of one fold and score the held-out rows."""
    train, test = plan.train_indices(fold), plan.test_indices(fold)
    fitted = fit_model([documents[i] for i in train], positive[train], trainer, settings, seed)
    predicted = fitted.model.predict_positive(fitted.pipeline.transform([documents[i] for i in test]))
    truth = positive[test]
    confusion = Confusion()
    confusion.add(truth, predicted)
    return FoldResult(float(np.mean(predicted == truth)), confusion)


def cross_validate(
    documents: Sequence[UserDocument],
    positive: np.ndarray,
    plan: FoldPlan,
    trainer: Trainer,
    settings: PipelineSettings,
    *,
    seed: int = 0,
    config_index: int = 0,
) -> list[FoldResult]:
    return [
        evaluate_fold(documents, positive, plan, fold, trainer, settings, _model_seed(seed, config_index, fold))
        for fold in range(plan.k)
    ]


@dataclass
class EvalReport:
    results: list[ConfigResult]
    best_index: int
    folds: int
    seed: int
    n_users: int
    class_counts: dict[str, int]
    task: str = ""
    best_model: FittedModel | None = field(default=None, repr=False)
    best_model_path: str | None = None
    refit_accuracy: float | None = None

    @property
    def best(self) -> ConfigResult:
        return self.results[self.best_index]

    def best_per_classifier(self) -> dict[str, ConfigResult]:
        best: dict[str, ConfigResult] = {}
        for result in self.results:
            current = best.get(result.point.classifier)
            if current is None or result.mean_accuracy > current.mean_accuracy:
                best[result.point.classifier] = result
        return best

    def to_dict(self) -> dict[str, Any]:
        return {
            "task": self.task,
            "folds": self.folds,
            "seed": self.seed,
            "n_users": self.n_users,
            "class_counts": self.class_counts,
            "configs": [result.to_dict() for result in self.results],
            "best": {"key": self.best.point.key, "mean_accuracy": self.best.mean_accuracy},
            "best_per_classifier": {
                kind: {"key": result.point.key, "mean_accuracy": result.mean_accuracy}
                for kind, result in self.best_per_classifier().items()
            },
            "refit": (
                None
                if self.refit_accuracy is None
                else {"key": self.best.point.key, "training_accuracy": self.refit_accuracy}
            ),
            "best_model": self.best_model_path,
        }


def positive_mask(labeled: Sequence[LabeledUser]) -> np.ndarray:
    return np.asarray([user.label is ClassLabel.CLASS_A for user in labeled], dtype=bool)


def grid_search(
    points: Sequence[GridPoint],
    plan: FoldPlan,
    documents: Sequence[UserDocument],
    positive: np.ndarray,
    config: LatentConfig,
    *,
    base_settings: PipelineSettings | None = None,
    models_seed: int = 0,
    workers: int = 1,
    refit: bool = True,
) -> EvalReport:
    """Cross-validate every grid point and refit the best one on all rows.

    Folds of all points run on a bounded thread pool; results are merged in grid order, and
    ties on mean accuracy go to the earlier point.
    """
    if not points:
        raise ValueError("grid is empty")
    base = base_settings or PipelineSettings.from_config(config)
    jobs = [(ci, fold) for ci in range(len(points)) for fold in range(plan.k)]
    trainers = [point.trainer(config) for point in points]
    settings = [point.pipeline_settings(base) for point in points]

    def run(job: tuple[int, int]) -> FoldResult:
        ci, fold = job
        return evaluate_fold(
            documents, positive, plan, fold, trainers[ci], settings[ci], _model_seed(models_seed, ci, fold)
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            fold_results = list(pool.map(run, jobs))
    else:
        fold_results = [run(job) for job in jobs]

    results: list[ConfigResult] = []
    for ci, point in enumerate(points):
        per_fold = fold_results[ci * plan.k : (ci + 1) * plan.k]
        confusion = Confusion()
        for result in per_fold:
            confusion.merge(result.confusion)
        results.append(ConfigResult(point, trainers[ci].hyperparameters(), [r.accuracy for r in per_fold], confusion))
        logger.info("%s: mean accuracy %.4f", point.key, results[-1].mean_accuracy)

    best_index = max(range(len(results)), key=lambda i: (results[i].mean_accuracy, -i))
    best_model = None
    refit_accuracy = None
    if refit:
        best_model = fit_model(
            documents,
            positive,
            trainers[best_index],
            settings[best_index],
            _model_seed(models_seed, best_index, plan.k),
        )
        predicted = best_model.model.predict_positive(best_model.pipeline.transform(documents))
        refit_accuracy = float(np.mean(predicted == positive))
    return EvalReport(
        results=results,
        best_index=best_index,
        folds=plan.k,
        seed=plan.seed,
        n_users=len(documents),
        class_counts={
            ClassLabel.CLASS_A.value: int(positive.sum()),
            ClassLabel.CLASS_B.value: int((~positive).sum()),
        },
        best_model=best_model,
        refit_accuracy=refit_accuracy,
    )
