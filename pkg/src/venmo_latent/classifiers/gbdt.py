"""Gradient-boosted regression trees on the logistic loss."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import sparse
from sklearn.tree import DecisionTreeRegressor

from venmo_latent.classifiers.base import (
    FeatureMetadata,
    check_training_data,
    check_width,
    logistic_loss,
    sigmoid,
)

logger = logging.getLogger(__name__)

_LEAF_LIMIT = 10.0
_HESSIAN_FLOOR = 1e-12
_MAX_HALVINGS = 30
_LEAF = -1


@dataclass
class RegressionTree:
    """Array form of a fitted tree; ``left[i] == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @classmethod
    def from_sklearn(cls, estimator: DecisionTreeRegressor, leaf_values: np.ndarray) -> "RegressionTree":
        tree = estimator.tree_
        return cls(
            feature=np.asarray(tree.feature, dtype=np.int64).copy(),
            threshold=np.asarray(tree.threshold, dtype=np.float64).copy(),
            left=np.asarray(tree.children_left, dtype=np.int64).copy(),
            right=np.asarray(tree.children_right, dtype=np.int64).copy(),
            value=np.asarray(leaf_values, dtype=np.float64),
        )

    def apply(self, X: sparse.csr_matrix) -> np.ndarray:
        # Trees split on float32 copies of the features, so compare the same way.
        nodes = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        active = self.left[nodes] != _LEAF
        while active.any():
            idx = rows[active]
            current = nodes[idx]
            values = np.asarray(X[idx, self.feature[current]]).ravel().astype(np.float32)
            go_left = values <= self.threshold[current]
            nodes[idx] = np.where(go_left, self.left[current], self.right[current])
            active = self.left[nodes] != _LEAF
        return nodes

    def predict(self, X: sparse.csr_matrix) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> dict[str, list]:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, list]) -> "RegressionTree":
        return cls(
            feature=np.asarray(data["feature"], dtype=np.int64),
            threshold=np.asarray(data["threshold"], dtype=np.float64),
            left=np.asarray(data["left"], dtype=np.int64),
            right=np.asarray(data["right"], dtype=np.int64),
            value=np.asarray(data["value"], dtype=np.float64),
        )


@dataclass
class GbdtModel:
    trees: list[RegressionTree]
    initial: float
    learning_rate: float
    max_depth: int
    rounds: int
    seed: int
    metadata: FeatureMetadata
    width_: int = 0
    trajectory: list[float] = field(default_factory=list)
    kind: str = "gbdt"

    @property
    def width(self) -> int:
        return self.width_

    def hyperparameters(self) -> dict[str, Any]:
        return {
            "rounds": self.rounds,
            "max_depth": self.max_depth,
            "learning_rate": self.learning_rate,
            "seed": self.seed,
        }

    def decision_function(self, X: sparse.spmatrix | np.ndarray) -> np.ndarray:
        matrix = check_width(X, self.width)
        scores = np.full(matrix.shape[0], self.initial)
        for tree in self.trees:
            scores += tree.predict(matrix)
        return scores

    def predict_proba(self, X: sparse.spmatrix | np.ndarray) -> np.ndarray:
        return sigmoid(self.decision_function(X))

    def predict(self, X: sparse.spmatrix | np.ndarray) -> np.ndarray:
        return (self.decision_function(X) >= 0.0).astype(int)

    def predict_positive(self, X: sparse.spmatrix | np.ndarray) -> np.ndarray:
        return self.predict(X) == 1

    def to_params(self) -> dict[str, Any]:
        return {
            "initial": self.initial,
            "width": self.width_,
            "trees": [tree.to_dict() for tree in self.trees],
            "trajectory": list(self.trajectory),
        }

    @classmethod
    def from_params(cls, params: dict[str, Any], hyperparameters: dict[str, Any], metadata: FeatureMetadata) -> "GbdtModel":
        return cls(
            trees=[RegressionTree.from_dict(tree) for tree in params["trees"]],
            initial=float(params["initial"]),
            learning_rate=float(hyperparameters["learning_rate"]),
            max_depth=int(hyperparameters["max_depth"]),
            rounds=int(hyperparameters["rounds"]),
            seed=int(hyperparameters.get("seed", 0)),
            metadata=metadata,
            width_=int(params["width"]),
            trajectory=[float(v) for v in params.get("trajectory", [])],
        )


def _newton_leaves(leaves: np.ndarray, residual: np.ndarray, hessian: np.ndarray, node_count: int) -> np.ndarray:
    numerator = np.bincount(leaves, weights=residual, minlength=node_count)
    denominator = np.bincount(leaves, weights=hessian, minlength=node_count)
    values = numerator / np.maximum(denominator, _HESSIAN_FLOOR)
    return np.clip(values, -_LEAF_LIMIT, _LEAF_LIMIT)


def train_gbdt(
    X: sparse.spmatrix | np.ndarray,
    y: np.ndarray,
    *,
    rounds: int = 200,
    max_depth: int = 3,
    learning_rate: float = 0.1,
    seed: int = 0,
    metadata: FeatureMetadata | None = None,
) -> GbdtModel:
    """Stagewise boosting for labels ``y`` in {0, 1}.

    Each round fits a regression tree to the negative gradient ``y - p``, replaces its leaf
    values with one Newton step, and halves the step until the training loss does not rise.
    The trajectory holds the training loss before the first round and after every round.
    """
    data = check_training_data(X, y, metadata, positive_value=1)
    matrix = data.X
    csc = matrix.tocsc()
    target = data.positive.astype(np.float64)
    prior = float(target.mean())
    initial = float(np.log(prior / (1.0 - prior)))
    scores = np.full(matrix.shape[0], initial)
    loss = logistic_loss(target, scores)
    trajectory = [loss]
    rng = np.random.default_rng(seed)
    trees: list[RegressionTree] = []

    for round_index in range(rounds):
        p = sigmoid(scores)
        residual = target - p
        estimator = DecisionTreeRegressor(
            max_depth=max_depth, random_state=int(rng.integers(0, 2**31 - 1))
        )
        estimator.fit(csc, residual)
        leaves = estimator.apply(matrix.astype(np.float32))
        leaf_values = _newton_leaves(leaves, residual, p * (1.0 - p), estimator.tree_.node_count)

        step = learning_rate
        for _ in range(_MAX_HALVINGS):
            candidate = scores + step * leaf_values[leaves]
            candidate_loss = logistic_loss(target, candidate)
            if candidate_loss <= loss:
                break
            step *= 0.5
        else:
            step = 0.0
            candidate, candidate_loss = scores, loss
        if step != learning_rate:
            logger.debug("gbdt round %d: step reduced to %.3g", round_index + 1, step)

        trees.append(RegressionTree.from_sklearn(estimator, step * leaf_values))
        scores, loss = candidate, candidate_loss
        trajectory.append(loss)

    return GbdtModel(
        trees=trees,
        initial=initial,
        learning_rate=learning_rate,
        max_depth=max_depth,
        rounds=rounds,
        seed=seed,
        metadata=data.metadata,
        width_=matrix.shape[1],
        trajectory=trajectory,
    )


class GbdtTrainer:
    kind = "gbdt"

    def __init__(self, rounds: int = 200, max_depth: int = 3, learning_rate: float = 0.1) -> None:
        self.rounds = rounds
        self.max_depth = max_depth
        self.learning_rate = learning_rate

    def hyperparameters(self) -> dict[str, Any]:
        return {"rounds": self.rounds, "max_depth": self.max_depth, "learning_rate": self.learning_rate}

    def fit(self, X, positive, *, seed: int = 0, metadata: FeatureMetadata | None = None) -> GbdtModel:
        y = np.asarray(positive, dtype=bool).astype(int)
        return train_gbdt(X, y, seed=seed, metadata=metadata, **self.hyperparameters())
