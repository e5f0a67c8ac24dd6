from __future__ import annotations

import numpy as np
import pytest
from scipy import sparse

from venmo_latent.classifiers import get_trainer, train_gbdt
from venmo_latent.errors import DimensionMismatch, SingleClass


def _noisy(seed: int, n: int = 80) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 4))
    y = ((X[:, 0] + 0.5 * X[:, 1] + rng.normal(scale=0.8, size=n)) > 0).astype(int)
    return X, y


def test_single_stump_separates_one_feature() -> None:
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    y = np.array([0, 0, 1, 1])
    model = train_gbdt(X, y, rounds=1, max_depth=1, learning_rate=0.1)
    assert model.predict(X).tolist() == [0, 0, 1, 1]
    assert len(model.trees) == 1


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_training_loss_never_rises(seed: int) -> None:
    X, y = _noisy(seed)
    model = train_gbdt(X, y, rounds=50, max_depth=3, learning_rate=0.5, seed=seed)
    assert len(model.trajectory) == 51
    assert all(later <= earlier for earlier, later in zip(model.trajectory, model.trajectory[1:]))
    assert model.trajectory[-1] < model.trajectory[0]


def test_zero_learning_rate_keeps_the_prior() -> None:
    X, y = _noisy(3)
    y[:] = 0
    y[:20] = 1
    model = train_gbdt(X, y, rounds=5, learning_rate=0.0)
    prior = np.log(0.25 / 0.75)
    assert model.initial == pytest.approx(prior)
    assert np.allclose(model.decision_function(X), prior)
    assert np.allclose(model.predict_proba(X), 0.25)


def test_sparse_input_and_width_check() -> None:
    X, y = _noisy(4)
    model = train_gbdt(sparse.csr_matrix(X), y, rounds=5)
    dense = train_gbdt(X, y, rounds=5)
    assert np.allclose(model.decision_function(X), dense.decision_function(X))
    with pytest.raises(DimensionMismatch):
        model.predict(np.ones((1, 2)))


def test_same_seed_same_model() -> None:
    X, y = _noisy(5)
    first = train_gbdt(X, y, rounds=10, seed=4)
    second = train_gbdt(X, y, rounds=10, seed=4)
    assert first.to_params() == second.to_params()


def test_single_class_rejected() -> None:
    with pytest.raises(SingleClass):
        train_gbdt(np.ones((3, 1)), np.ones(3))


def test_trainer_maps_boolean_labels() -> None:
    X, y = _noisy(6)
    model = get_trainer("GBDT", rounds=20, max_depth=2).fit(X, y == 1, seed=1)
    assert model.kind == "gbdt"
    assert model.hyperparameters()["max_depth"] == 2
    assert np.mean(model.predict_positive(X) == (y == 1)) > 0.8
