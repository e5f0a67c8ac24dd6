from __future__ import annotations

from typing import Any

from venmo_latent.classifiers.base import FeatureMetadata, Model, Trainer
from venmo_latent.classifiers.gbdt import GbdtModel, GbdtTrainer, train_gbdt
from venmo_latent.classifiers.mlp import MlpModel, MlpTrainer, train_mlp
from venmo_latent.classifiers.svm import LinearSvmModel, SvmTrainer, train_linear_svm

CLASSIFIER_KINDS = ("svm", "mlp", "gbdt")

MODEL_CLASSES: dict[str, Any] = {
    "svm": LinearSvmModel,
    "mlp": MlpModel,
    "gbdt": GbdtModel,
}


def get_trainer(kind: str, **hyperparameters: Any) -> Trainer:
    normalized = kind.strip().lower()
    if normalized == "svm":
        return SvmTrainer(**hyperparameters)
    if normalized == "mlp":
        return MlpTrainer(**hyperparameters)
    if normalized == "gbdt":
        return GbdtTrainer(**hyperparameters)
    raise ValueError(f"Unsupported classifier: {kind}")


__all__ = [
    "CLASSIFIER_KINDS",
    "FeatureMetadata",
    "GbdtModel",
    "LinearSvmModel",
    "MlpModel",
    "Model",
    "Trainer",
    "get_trainer",
    "train_gbdt",
    "train_linear_svm",
    "train_mlp",
]
