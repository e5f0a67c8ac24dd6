from __future__ import annotations

import numpy as np
import pytest
from scipy import sparse

from venmo_latent.classifiers import FeatureMetadata, LinearSvmModel, get_trainer, train_linear_svm
from venmo_latent.classifiers.svm import KernelRows
from venmo_latent.errors import DimensionMismatch, NonFinite, SingleClass


def _blobs(seed: int, n: int = 60, width: int = 5, gap: float = 2.0) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    y = np.where(np.arange(n) % 2 == 0, 1, -1)
    X = rng.normal(size=(n, width))
    X[:, 0] += gap * y
    return X, y


def test_separable_points_in_one_dimension() -> None:
    model = train_linear_svm(np.array([[-1.0], [1.0]]), np.array([-1, 1]), C=10.0)
    assert model.predict(np.array([[-1.0], [1.0]])).tolist() == [-1, 1]
    assert model.weights[0] > 0


def test_decision_function_and_tie_rule() -> None:
    model = LinearSvmModel(np.array([1.0]), 0.0, 1.0, FeatureMetadata.anonymous(1))
    assert model.decision_function(np.array([[2.0]])).tolist() == [2.0]
    assert model.predict(np.array([[0.0]])).tolist() == [1]
    assert model.predict(np.array([[-3.0], [0.5], [-0.1]])).tolist() == [-1, 1, -1]


def test_objective_not_worse_than_zero_solution() -> None:
    X, y = _blobs(0)
    for C in (0.01, 1.0, 100.0):
        model = train_linear_svm(X, y, C=C)
        assert model.objective(X, y) <= C * len(y) + 1e-9


def test_matches_reference_solver_objective() -> None:
    from sklearn.svm import SVC

    X, y = _blobs(1, gap=0.8)
    model = train_linear_svm(X, y, C=1.0, tol=1e-6)
    reference = SVC(kernel="linear", C=1.0, tol=1e-8).fit(X, y)
    ref_w, ref_b = reference.coef_.ravel(), float(reference.intercept_[0])
    ref_objective = 0.5 * ref_w @ ref_w + np.maximum(0.0, 1.0 - y * (X @ ref_w + ref_b)).sum()
    assert model.objective(X, y) == pytest.approx(ref_objective, rel=1e-3)


def test_prediction_invariant_under_positive_rescaling() -> None:
    X, y = _blobs(2)
    model = train_linear_svm(X, y)
    scaled = LinearSvmModel(model.weights * 7.5, model.bias * 7.5, model.C, model.metadata)
    assert np.array_equal(model.predict(X), scaled.predict(X))


def test_sparse_and_dense_inputs_agree() -> None:
    X, y = _blobs(3)
    dense = train_linear_svm(X, y)
    from_sparse = train_linear_svm(sparse.csr_matrix(X), y)
    assert np.allclose(dense.weights, from_sparse.weights)
    assert dense.bias == pytest.approx(from_sparse.bias)


def test_training_is_deterministic() -> None:
    X, y = _blobs(4)
    first, second = train_linear_svm(X, y, seed=1), train_linear_svm(X, y, seed=1)
    assert first.to_params() == second.to_params()


def test_rejects_single_class_and_bad_input() -> None:
    X = np.ones((4, 2))
    with pytest.raises(SingleClass):
        train_linear_svm(X, np.ones(4))
    with pytest.raises(NonFinite):
        train_linear_svm(np.array([[np.nan], [1.0]]), np.array([1, -1]))
    with pytest.raises(DimensionMismatch):
        train_linear_svm(X, np.array([1, -1]))
    with pytest.raises(ValueError):
        train_linear_svm(np.array([[0.0], [1.0]]), np.array([-1, 1]), C=0.0)


def test_predict_checks_width() -> None:
    model = train_linear_svm(np.array([[-1.0, 0.0], [1.0, 0.0]]), np.array([-1, 1]))
    with pytest.raises(DimensionMismatch):
        model.predict(np.ones((1, 3)))


def test_trainer_maps_boolean_labels() -> None:
    X, y = _blobs(5)
    trainer = get_trainer("svm", C=1.0)
    model = trainer.fit(X, y == 1)
    assert model.kind == "svm"
    assert np.mean(model.predict_positive(X) == (y == 1)) > 0.9
    with pytest.raises(ValueError, match="Unsupported classifier"):
        get_trainer("knn")


def test_batch_predictions_keep_row_order() -> None:
    X, y = _blobs(6)
    model = train_linear_svm(X, y)
    rows = [model.predict(X[i : i + 1])[0] for i in range(len(X))]
    assert model.predict(X).tolist() == rows


def test_one_feature_xor_is_not_separable() -> None:
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    y = np.array([-1, 1, -1, 1])
    model = train_linear_svm(X, y, C=100.0)
    assert np.mean(model.predict(X) == y) <= 0.75


def test_kernel_rows_match_the_gram_matrix_within_a_bounded_cache() -> None:
    X = sparse.random(40, 30, density=0.2, format="csr", random_state=np.random.default_rng(0))
    gram = (X @ X.T).toarray()
    kernel = KernelRows(X, capacity=3)
    for k in [0, 5, 0, 7, 9, 5, 39]:
        np.testing.assert_allclose(kernel.row(k), gram[k])
        assert len(kernel) <= 3
    np.testing.assert_allclose(kernel.diag, np.diag(gram))
    # 0 was reused while cached; 5 was evicted before its second use
    assert kernel.computed == 6


def test_tiny_cache_gives_the_same_model() -> None:
    X, y = _blobs(4, n=80)
    roomy = train_linear_svm(X, y, C=1.0)
    tight = train_linear_svm(X, y, C=1.0, cache_rows=2)
    np.testing.assert_allclose(tight.weights, roomy.weights)
    assert tight.bias == pytest.approx(roomy.bias)
