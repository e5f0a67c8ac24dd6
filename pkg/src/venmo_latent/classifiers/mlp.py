"""One-hidden-layer perceptron: ReLU hidden units, logistic output, binary cross-entropy."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import sparse

from venmo_latent.classifiers.base import (
    FeatureMetadata,
    check_training_data,
    check_width,
    logistic_loss,
    sigmoid,
)
from venmo_latent.errors import NonFinite

logger = logging.getLogger(__name__)


@dataclass
class MlpParams:
    W1: np.ndarray  # (D, H)
    b1: np.ndarray  # (H,)
    W2: np.ndarray  # (H,)
    b2: float

    def copy(self) -> "MlpParams":
        return MlpParams(self.W1.copy(), self.b1.copy(), self.W2.copy(), float(self.b2))

    def is_finite(self) -> bool:
        return bool(
            np.all(np.isfinite(self.W1))
            and np.all(np.isfinite(self.b1))
            and np.all(np.isfinite(self.W2))
            and np.isfinite(self.b2)
        )


def initial_params(width: int, hidden: int, rng: np.random.Generator) -> MlpParams:
    return MlpParams(
        W1=rng.normal(0.0, np.sqrt(2.0 / max(width, 1)), size=(width, hidden)),
        b1=np.zeros(hidden),
        W2=rng.normal(0.0, np.sqrt(1.0 / hidden), size=hidden),
        b2=0.0,
    )


def forward(params: MlpParams, X: sparse.spmatrix | np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return hidden pre-activations, hidden activations and output logits."""
    pre = np.asarray(X @ params.W1) + params.b1
    hidden = np.maximum(pre, 0.0)
    logits = hidden @ params.W2 + params.b2
    return pre, hidden, logits


def loss_and_gradients(
    params: MlpParams, X: sparse.spmatrix | np.ndarray, y: np.ndarray
) -> tuple[float, MlpParams]:
    """Mean cross-entropy over the rows of ``X`` and its gradient with respect to every parameter."""
    pre, hidden, logits = forward(params, X)
    n = X.shape[0]
    d_logits = (sigmoid(logits) - y) / n
    d_hidden = np.outer(d_logits, params.W2) * (pre > 0)
    grads = MlpParams(
        W1=np.asarray(X.T @ d_hidden),
        b1=d_hidden.sum(axis=0),
        W2=hidden.T @ d_logits,
        b2=float(d_logits.sum()),
    )
    return logistic_loss(y, logits), grads


@dataclass
class MlpModel:
    params: MlpParams
    hidden: int
    learning_rate: float
    epochs: int
    batch_size: int
    seed: int
    metadata: FeatureMetadata
    trajectory: list[float] = field(default_factory=list)
    kind: str = "mlp"

    @property
    def width(self) -> int:
        return int(self.params.W1.shape[0])

    def hyperparameters(self) -> dict[str, Any]:
        return {
            "hidden": self.hidden,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "seed": self.seed,
        }

    def predict_proba(self, X: sparse.spmatrix | np.ndarray) -> np.ndarray:
        _, _, logits = forward(self.params, check_width(X, self.width))
        return sigmoid(logits)

    def predict(self, X: sparse.spmatrix | np.ndarray) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(int)

    def predict_positive(self, X: sparse.spmatrix | np.ndarray) -> np.ndarray:
        return self.predict(X) == 1

    def to_params(self) -> dict[str, Any]:
        return {
            "W1": self.params.W1.tolist(),
            "b1": self.params.b1.tolist(),
            "W2": self.params.W2.tolist(),
            "b2": self.params.b2,
            "trajectory": list(self.trajectory),
        }

    @classmethod
    def from_params(cls, params: dict[str, Any], hyperparameters: dict[str, Any], metadata: FeatureMetadata) -> "MlpModel":
        hidden = int(hyperparameters["hidden"])
        W1 = np.asarray(params["W1"], dtype=np.float64).reshape(-1, hidden)
        return cls(
            params=MlpParams(
                W1=W1,
                b1=np.asarray(params["b1"], dtype=np.float64),
                W2=np.asarray(params["W2"], dtype=np.float64),
                b2=float(params["b2"]),
            ),
            hidden=hidden,
            learning_rate=float(hyperparameters["learning_rate"]),
            epochs=int(hyperparameters["epochs"]),
            batch_size=int(hyperparameters["batch_size"]),
            seed=int(hyperparameters.get("seed", 0)),
            metadata=metadata,
            trajectory=[float(v) for v in params.get("trajectory", [])],
        )


def train_mlp(
    X: sparse.spmatrix | np.ndarray,
    y: np.ndarray,
    *,
    hidden: int = 64,
    learning_rate: float = 0.01,
    epochs: int = 200,
    batch_size: int = 32,
    seed: int = 0,
    metadata: FeatureMetadata | None = None,
) -> MlpModel:
    """Mini-batch gradient descent on labels ``y`` in {0, 1}; the loss is recorded after every epoch."""
    data = check_training_data(X, y, metadata, positive_value=1)
    matrix = data.X
    target = data.positive.astype(np.float64)
    rng = np.random.default_rng(seed)
    params = initial_params(matrix.shape[1], hidden, rng)
    n = matrix.shape[0]
    trajectory: list[float] = []
    for epoch in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            batch = order[start : start + batch_size]
            _, grads = loss_and_gradients(params, matrix[batch], target[batch])
            params.W1 -= learning_rate * grads.W1
            params.b1 -= learning_rate * grads.b1
            params.W2 -= learning_rate * grads.W2
            params.b2 -= learning_rate * grads.b2
        _, _, logits = forward(params, matrix)
        loss = logistic_loss(target, logits)
        if not np.isfinite(loss) or not params.is_finite():
            raise NonFinite(f"mlp loss became non-finite at epoch {epoch + 1} (learning_rate={learning_rate})")
        trajectory.append(loss)
    logger.debug("mlp: final loss %.6f after %d epochs", trajectory[-1] if trajectory else float("nan"), epochs)
    return MlpModel(params, hidden, learning_rate, epochs, batch_size, seed, data.metadata, trajectory)


class MlpTrainer:
    kind = "mlp"

    def __init__(self, hidden: int = 64, learning_rate: float = 0.01, epochs: int = 200, batch_size: int = 32) -> None:
        self.hidden = hidden
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size

    def hyperparameters(self) -> dict[str, Any]:
        return {
            "hidden": self.hidden,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
        }

    def fit(self, X, positive, *, seed: int = 0, metadata: FeatureMetadata | None = None) -> MlpModel:
        y = np.asarray(positive, dtype=bool).astype(int)
        return train_mlp(X, y, seed=seed, metadata=metadata, **self.hyperparameters())
