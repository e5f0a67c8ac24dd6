"""Linear SVM trained in the dual with an unregularised bias.

The solver is sequential minimal optimisation with second-order working-set selection. Rows
of the linear Gram matrix are computed on demand and kept in a bounded cache, so memory
grows with the cache size rather than with the square of the number of users. Each step
moves one pair of dual variables while keeping ``sum(alpha * y) = 0`` and ``0 <= alpha <= C``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import sparse

from venmo_latent.classifiers.base import FeatureMetadata, check_training_data, check_width

logger = logging.getLogger(__name__)

_TAU = 1e-12


class KernelRows:
    """Rows of ``X @ X.T`` computed on demand, least recently used rows evicted first."""

    def __init__(self, matrix: sparse.csr_matrix, capacity: int = 256) -> None:
        if capacity < 1:
            raise ValueError(f"capacity must be at least 1, got {capacity}")
        self.matrix = matrix
        self.capacity = capacity
        self.diag = np.asarray(matrix.multiply(matrix).sum(axis=1), dtype=np.float64).ravel()
        self._rows: dict[int, np.ndarray] = {}
        self.computed = 0

    def __len__(self) -> int:
        return len(self._rows)

    def row(self, k: int) -> np.ndarray:
        cached = self._rows.pop(k, None)
        if cached is None:
            dense = self.matrix[k].toarray().ravel()
            cached = np.asarray(self.matrix @ dense, dtype=np.float64).ravel()
            self.computed += 1
            if len(self._rows) >= self.capacity:
                self._rows.pop(next(iter(self._rows)))
        self._rows[k] = cached
        return cached


@dataclass
class LinearSvmModel:
    weights: np.ndarray
    bias: float
    C: float
    metadata: FeatureMetadata
    tol: float = 1e-3
    max_iter: int = 200_000
    trajectory: list[float] = field(default_factory=list)
    kind: str = "svm"

    @property
    def width(self) -> int:
        return int(self.weights.shape[0])

    def hyperparameters(self) -> dict[str, Any]:
        return {"C": self.C, "tol": self.tol, "max_iter": self.max_iter}

    def decision_function(self, X: sparse.spmatrix | np.ndarray) -> np.ndarray:
        matrix = check_width(X, self.width)
        return np.asarray(matrix @ self.weights).ravel() + self.bias

    def predict(self, X: sparse.spmatrix | np.ndarray) -> np.ndarray:
        """Labels in {-1, +1}; a decision of exactly 0 maps to +1."""
        return np.where(self.decision_function(X) >= 0.0, 1, -1)

    def predict_positive(self, X: sparse.spmatrix | np.ndarray) -> np.ndarray:
        return self.predict(X) == 1

    def objective(self, X: sparse.spmatrix | np.ndarray, y: np.ndarray) -> float:
        margins = np.asarray(y, dtype=np.float64) * self.decision_function(X)
        return 0.5 * float(self.weights @ self.weights) + self.C * float(np.maximum(0.0, 1.0 - margins).sum())

    def to_params(self) -> dict[str, Any]:
        return {"weights": self.weights.tolist(), "bias": self.bias, "trajectory": list(self.trajectory)}

    @classmethod
    def from_params(cls, params: dict[str, Any], hyperparameters: dict[str, Any], metadata: FeatureMetadata) -> "LinearSvmModel":
        return cls(
            weights=np.asarray(params["weights"], dtype=np.float64),
            bias=float(params["bias"]),
            C=float(hyperparameters["C"]),
            metadata=metadata,
            tol=float(hyperparameters.get("tol", 1e-3)),
            max_iter=int(hyperparameters.get("max_iter", 200_000)),
            trajectory=[float(v) for v in params.get("trajectory", [])],
        )


def _duality_gap(alpha: np.ndarray, y: np.ndarray, f: np.ndarray, b: float, C: float) -> float:
    w_norm2 = float((alpha * y) @ f)
    primal = 0.5 * w_norm2 + C * float(np.maximum(0.0, 1.0 - y * (f + b)).sum())
    dual = float(alpha.sum()) - 0.5 * w_norm2
    return (primal - dual) / max(abs(primal), 1.0)


def _bias(alpha: np.ndarray, y: np.ndarray, f: np.ndarray, C: float, m: float, M: float) -> float:
    free = (alpha > 0.0) & (alpha < C)
    if free.any():
        return float(np.mean(y[free] - f[free]))
    return 0.5 * (m + M)


def train_linear_svm(
    X: sparse.spmatrix | np.ndarray,
    y: np.ndarray,
    C: float = 1.0,
    tol: float = 1e-3,
    seed: int = 0,
    *,
    max_iter: int = 200_000,
    cache_rows: int = 256,
    metadata: FeatureMetadata | None = None,
) -> LinearSvmModel:
    """Minimise ``0.5*|w|^2 + C * sum(hinge(y * (Xw + b)))`` for labels ``y`` in {-1, +1}.

    Stops when the maximal KKT violation or the relative duality gap drops below ``tol``.
    The solver is deterministic; ``seed`` is accepted for a uniform trainer signature.
    """
    if C <= 0:
        raise ValueError(f"C must be positive, got {C}")
    data = check_training_data(X, y, metadata, positive_value=1)
    matrix = data.X
    labels = np.where(data.positive, 1.0, -1.0)
    n = matrix.shape[0]

    kernel = KernelRows(matrix, cache_rows)
    diag = kernel.diag
    alpha = np.zeros(n)
    f = np.zeros(n)  # f = X w without bias
    trajectory: list[float] = []
    check_every = max(n, 10)
    m = M = 0.0

    iteration = 0
    converged = False
    while iteration < max_iter:
        grad = labels * f - 1.0
        score = -labels * grad
        up = ((labels > 0) & (alpha < C)) | ((labels < 0) & (alpha > 0))
        low = ((labels < 0) & (alpha < C)) | ((labels > 0) & (alpha > 0))
        if not up.any() or not low.any():
            converged = True
            break
        i = int(np.argmax(np.where(up, score, -np.inf)))
        m = float(score[i])
        M = float(np.min(score[low]))
        if m - M <= tol:
            converged = True
            break

        candidates = low & (score < m)
        b_t = m - score
        row_i = kernel.row(i)
        a_t = diag[i] + diag - 2.0 * row_i
        a_t = np.where(a_t > 0, a_t, _TAU)
        gain = np.where(candidates, -(b_t * b_t) / a_t, np.inf)
        j = int(np.argmin(gain))

        step = b_t[j] / a_t[j]
        limit_i = C - alpha[i] if labels[i] > 0 else alpha[i]
        limit_j = alpha[j] if labels[j] > 0 else C - alpha[j]
        step = min(step, limit_i, limit_j)
        alpha[i] += labels[i] * step
        alpha[j] -= labels[j] * step
        np.clip(alpha, 0.0, C, out=alpha)
        f += step * (row_i - kernel.row(j))
        iteration += 1

        if iteration % check_every == 0:
            gap = _duality_gap(alpha, labels, f, _bias(alpha, labels, f, C, m, M), C)
            trajectory.append(gap)
            if gap <= tol:
                converged = True
                break

    if not converged:
        logger.warning("svm solver hit max_iter=%d with KKT violation %.3g", max_iter, m - M)
    bias = _bias(alpha, labels, f, C, m, M)
    trajectory.append(_duality_gap(alpha, labels, f, bias, C))
    weights = np.asarray(matrix.T @ (alpha * labels)).ravel()
    logger.debug("svm: %d iterations, %d support vectors", iteration, int((alpha > 0).sum()))
    return LinearSvmModel(
        weights=weights,
        bias=bias,
        C=C,
        metadata=data.metadata,
        tol=tol,
        max_iter=max_iter,
        trajectory=trajectory,
    )


class SvmTrainer:
    kind = "svm"

    def __init__(self, C: float = 1.0, tol: float = 1e-3, max_iter: int = 200_000) -> None:
        self.C = C
        self.tol = tol
        self.max_iter = max_iter

    def hyperparameters(self) -> dict[str, Any]:
        return {"C": self.C, "tol": self.tol, "max_iter": self.max_iter}

    def fit(self, X, positive, *, seed: int = 0, metadata: FeatureMetadata | None = None) -> LinearSvmModel:
        y = np.where(np.asarray(positive, dtype=bool), 1, -1)
        return train_linear_svm(X, y, self.C, self.tol, seed, max_iter=self.max_iter, metadata=metadata)
