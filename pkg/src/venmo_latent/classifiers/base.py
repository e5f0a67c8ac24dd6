from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, Protocol

import numpy as np
from scipy import sparse

from venmo_latent.errors import DimensionMismatch, NonFinite, SingleClass


@dataclass(frozen=True)
class FeatureMetadata:
    """Column names of a training matrix: text terms first, then engineered columns."""

    text_terms: tuple[str, ...] = ()
    engineered: tuple[str, ...] = ()

    @property
    def names(self) -> list[str]:
        return [*self.text_terms, *self.engineered]

    def __len__(self) -> int:
        return len(self.text_terms) + len(self.engineered)

    def to_dict(self) -> dict[str, Any]:
        return {"text_terms": list(self.text_terms), "engineered": list(self.engineered)}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "FeatureMetadata":
        return cls(tuple(data.get("text_terms", ())), tuple(data.get("engineered", ())))

    @classmethod
    def anonymous(cls, width: int) -> "FeatureMetadata":
        return cls(engineered=tuple(f"f{i}" for i in range(width)))


class Model(Protocol):
    kind: str
    metadata: FeatureMetadata
    trajectory: list[float]

    @property
    def width(self) -> int: ...

    def hyperparameters(self) -> dict[str, Any]: ...

    def predict_positive(self, X: sparse.spmatrix | np.ndarray) -> np.ndarray: ...

    def to_params(self) -> dict[str, Any]: ...


class Trainer(Protocol):
    kind: str

    def hyperparameters(self) -> dict[str, Any]: ...

    def fit(
        self,
        X: sparse.spmatrix | np.ndarray,
        positive: np.ndarray,
        *,
        seed: int = 0,
        metadata: FeatureMetadata | None = None,
    ) -> Model: ...


@dataclass
class TrainingData:
    X: sparse.csr_matrix
    positive: np.ndarray
    metadata: FeatureMetadata = field(default_factory=FeatureMetadata)


def as_matrix(X: sparse.spmatrix | np.ndarray) -> sparse.csr_matrix:
    return sparse.csr_matrix(X, dtype=np.float64)


def check_training_data(
    X: sparse.spmatrix | np.ndarray,
    labels: Sequence[Any] | np.ndarray,
    metadata: FeatureMetadata | None,
    *,
    positive_value: Any,
) -> TrainingData:
    """Validate a training set and return it as csr rows plus a boolean class-a mask."""
    matrix = as_matrix(X)
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.shape[0] != matrix.shape[0]:
        raise DimensionMismatch(f"{matrix.shape[0]} rows but {labels.shape} labels")
    if not np.all(np.isfinite(matrix.data)):
        raise NonFinite("training matrix contains NaN or infinite values")
    positive = labels == positive_value
    if positive.all() or not positive.any():
        raise SingleClass("training labels contain a single class")
    if metadata is None:
        metadata = FeatureMetadata.anonymous(matrix.shape[1])
    if len(metadata) != matrix.shape[1]:
        raise DimensionMismatch(f"metadata names {len(metadata)} columns, matrix has {matrix.shape[1]}")
    return TrainingData(matrix, positive, metadata)


def check_width(X: sparse.spmatrix | np.ndarray, width: int) -> sparse.csr_matrix:
    matrix = as_matrix(X)
    if matrix.shape[1] != width:
        raise DimensionMismatch(f"model expects {width} columns, got {matrix.shape[1]}")
    return matrix


def sigmoid(z: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -z))


def logistic_loss(y: np.ndarray, logits: np.ndarray) -> float:
    """Mean binary cross-entropy of ``y`` in {0, 1} against raw scores."""
    return float(np.mean(np.logaddexp(0.0, logits) - y * logits))
