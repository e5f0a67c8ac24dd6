from __future__ import annotations

import random
from collections import Counter

import numpy as np
import pytest

from venmo_latent.config import GridDefaults, LatentConfig
from venmo_latent.corpus import group_by_user
from venmo_latent.errors import SingleClass, TooFewSamples
from venmo_latent.evaluation import (
    GridPoint,
    balance_classes,
    cross_validate,
    evaluate_fold,
    expand_grid,
    fit_model,
    grid_search,
    positive_mask,
    stratified_kfold,
)
from venmo_latent.label import ClassLabel, LabeledUser, LabelTask
from venmo_latent.pipeline import PipelineSettings, build_documents

SETTINGS = PipelineSettings(min_df=1, n_range=(1, 1))


def _labeled(n_a: int, n_b: int) -> list[LabeledUser]:
    return [LabeledUser(f"a{i}", ClassLabel.CLASS_A, LabelTask.GENDER) for i in range(n_a)] + [
        LabeledUser(f"b{i}", ClassLabel.CLASS_B, LabelTask.GENDER) for i in range(n_b)
    ]


def _documents(make_transaction, per_class: int = 10, extra: dict[str, str] | None = None):
    extra = extra or {}
    transactions = []
    for i in range(per_class):
        for user, notes in ((f"a{i}", ["pizza beer", "wings"]), (f"b{i}", ["yoga brunch", "smoothie"])):
            for note in notes + ([extra[user]] if user in extra else []):
                transactions.append(make_transaction(user, "sink", note))
    corpus = group_by_user(transactions)
    labeled = _labeled(per_class, per_class)
    return build_documents(corpus, [u.user_id for u in labeled]), positive_mask(labeled)


def test_balance_downsamples_majority() -> None:
    balanced = balance_classes(_labeled(346, 218), seed=0)
    counts = Counter(user.label for user in balanced)
    assert counts == {ClassLabel.CLASS_A: 218, ClassLabel.CLASS_B: 218}
    assert balanced == balance_classes(_labeled(346, 218), seed=0)
    # input order is kept
    ids = [u.user_id for u in balanced]
    assert ids[-1] == "b217"


def test_balance_needs_two_classes() -> None:
    with pytest.raises(SingleClass):
        balance_classes(_labeled(3, 0), seed=0)


def test_folds_partition_and_stratify_random_labels() -> None:
    rng = random.Random(5)
    for _ in range(500):
        k = rng.randint(2, 6)
        labels = [0] * rng.randint(k, 30) + [1] * rng.randint(k, 30)
        rng.shuffle(labels)
        plan = stratified_kfold(labels, k, seed=rng.randint(0, 1000))
        assert plan.k == k
        flat = [i for fold in plan.folds for i in fold]
        assert sorted(flat) == list(range(len(labels)))
        for cls in (0, 1):
            per_fold = [sum(1 for i in fold if labels[i] == cls) for fold in plan.folds]
            assert max(per_fold) - min(per_fold) <= 1
        for fold in range(k):
            assert not set(plan.train_indices(fold)) & set(plan.test_indices(fold))


def test_five_per_class_with_five_folds() -> None:
    plan = stratified_kfold([1] * 5 + [0] * 5, 5, seed=0)
    assert all(len(fold) == 2 for fold in plan.folds)


def test_too_few_samples() -> None:
    with pytest.raises(TooFewSamples):
        stratified_kfold([1, 1, 1, 0, 0, 0, 0, 0], 5, seed=0)
    with pytest.raises(TooFewSamples):
        stratified_kfold([1, 0], 1, seed=0)


def test_fold_plan_is_deterministic() -> None:
    labels = [1, 0] * 20
    assert stratified_kfold(labels, 4, seed=3) == stratified_kfold(labels, 4, seed=3)
    assert stratified_kfold(labels, 4, seed=3) != stratified_kfold(labels, 4, seed=4)


def test_held_out_tokens_never_reach_the_vocabulary(make_transaction) -> None:
    documents, positive = _documents(make_transaction, extra={"a0": "zanzibar"})
    plan = stratified_kfold(positive, 5, seed=0)
    fold = next(f for f in range(plan.k) if 0 in plan.test_indices(fold=f))
    train = plan.train_indices(fold)
    fitted = fit_model([documents[i] for i in train], positive[train], GridPoint("svm", "tfidf", (1, 1)).trainer(LatentConfig()), SETTINGS, seed=0)
    assert "zanzibar" not in fitted.pipeline.vocab.terms
    assert "zanzibar" not in fitted.model.metadata.names
    result = evaluate_fold(documents, positive, plan, fold, GridPoint("svm", "tfidf", (1, 1)).trainer(LatentConfig()), SETTINGS, seed=0)
    assert result.accuracy == 1.0


def test_single_point_grid_matches_cross_validation(make_transaction) -> None:
    documents, positive = _documents(make_transaction)
    config = LatentConfig()
    point = GridPoint("svm", "count", (1, 2), C=1.0)
    plan = stratified_kfold(positive, 5, seed=1)
    report = grid_search([point], plan, documents, positive, config, base_settings=SETTINGS, models_seed=9, refit=False)
    direct = cross_validate(documents, positive, plan, point.trainer(config), point.pipeline_settings(SETTINGS), seed=9)
    assert report.results[0].fold_accuracies == [r.accuracy for r in direct]
    assert report.best_model is None
    assert report.to_dict()["refit"] is None
    assert report.class_counts == {"class_a": 10, "class_b": 10}


def test_grid_results_do_not_depend_on_worker_count(make_transaction) -> None:
    documents, positive = _documents(make_transaction)
    config = LatentConfig(gbdt={"rounds": 5}, mlp={"epochs": 5, "hidden": 4})
    points = [
        GridPoint("svm", "tfidf", (1, 1), C=0.1),
        GridPoint("mlp", "count", (1, 1)),
        GridPoint("gbdt", "tfidf", (1, 2)),
    ]
    plan = stratified_kfold(positive, 4, seed=2)
    serial = grid_search(points, plan, documents, positive, config, base_settings=SETTINGS, models_seed=1, workers=1)
    pooled = grid_search(points, plan, documents, positive, config, base_settings=SETTINGS, models_seed=1, workers=4)
    assert serial.to_dict() == pooled.to_dict()
    assert serial.best_model is not None
    assert serial.to_dict()["refit"]["key"] == serial.best.point.key
    assert serial.refit_accuracy >= 0.9
    assert serial.results[2].hyperparameters["rounds"] == 5
    assert set(serial.to_dict()["best_per_classifier"]) == {"svm", "mlp", "gbdt"}


def test_ties_go_to_the_earlier_point(make_transaction) -> None:
    documents, positive = _documents(make_transaction)
    points = [GridPoint("svm", "tfidf", (1, 1), C=1.0), GridPoint("svm", "tfidf", (1, 1), C=10.0)]
    plan = stratified_kfold(positive, 5, seed=0)
    report = grid_search(points, plan, documents, positive, LatentConfig(), base_settings=SETTINGS, refit=False)
    assert report.results[0].mean_accuracy == report.results[1].mean_accuracy == 1.0
    assert report.best_index == 0
    confusion = report.best.confusion
    assert confusion.tp + confusion.fn + confusion.fp + confusion.tn == len(documents)


def test_expand_grid_order_and_size() -> None:
    points = expand_grid(GridDefaults())
    assert len(points) == 2 * 2 * 5 + 4 + 4
    assert points[0].key == "svm|count|1-1|C=0.01"
    assert len({p.key for p in points}) == len(points)
    assert all(p.C is None for p in points if p.classifier != "svm")


def test_expand_grid_overrides_and_empty() -> None:
    grid = GridDefaults(classifier=["gbdt"], vectorizer=["tfidf"], n_range=[(1, 1)], overrides={"gbdt": {"rounds": 7}})
    (point,) = expand_grid(grid)
    assert point.key == "gbdt|tfidf|1-1|rounds=7"
    assert point.trainer(LatentConfig()).hyperparameters()["rounds"] == 7
    with pytest.raises(ValueError):
        expand_grid(GridDefaults(classifier=[]))


POOL = [f"w{chr(ord('a') + i)}{chr(ord('a') + j)}" for i in range(5) for j in range(8)]


def _random_documents(make_transaction, n_users: int, seed: int, planted: dict[str, list[str]] | None = None):
    rng = random.Random(seed)
    planted = planted or {}
    transactions = []
    for i in range(n_users):
        user = f"u{i:03d}"
        notes = [" ".join(rng.choices(POOL, k=3)) for _ in range(4)] + planted.get(user, [])
        for note in notes:
            transactions.append(make_transaction(user, "sink", note))
    ids = [f"u{i:03d}" for i in range(n_users)]
    return build_documents(group_by_user(transactions), ids)


def test_random_labels_score_near_chance(make_transaction) -> None:
    documents = _random_documents(make_transaction, 300, seed=11)
    positive = np.array([True] * 150 + [False] * 150)
    np.random.default_rng(11).shuffle(positive)
    plan = stratified_kfold(positive, 5, seed=0)
    point = GridPoint("svm", "tfidf", (1, 1), C=1.0)
    results = cross_validate(documents, positive, plan, point.trainer(LatentConfig()), point.pipeline_settings(SETTINGS))
    mean = float(np.mean([r.accuracy for r in results]))
    assert abs(mean - 0.5) <= 0.1


def test_grid_prefers_the_config_that_sees_word_order(make_transaction) -> None:
    # both classes use the same words; only their order differs
    planted = {
        f"u{i:03d}": ["pizza party"] * 2 if i % 2 == 0 else ["party pizza"] * 2
        for i in range(80)
    }
    documents = _random_documents(make_transaction, 80, seed=4, planted=planted)
    positive = np.array([i % 2 == 0 for i in range(80)])
    points = [GridPoint("svm", "count", (1, 1), C=1.0), GridPoint("svm", "tfidf", (1, 2), C=1.0)]
    plan = stratified_kfold(positive, 5, seed=0)
    report = grid_search(points, plan, documents, positive, LatentConfig(), base_settings=SETTINGS, refit=False)
    assert report.best.point.key == "svm|tfidf|1-2|C=1"
    assert report.results[1].mean_accuracy >= 0.9
    assert report.results[0].mean_accuracy <= 0.75
