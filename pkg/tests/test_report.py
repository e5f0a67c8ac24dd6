from __future__ import annotations

import csv
import io

import numpy as np
import pytest

from venmo_latent.classifiers import FeatureMetadata, LinearSvmModel
from venmo_latent.label import ClassLabel
from venmo_latent.report import display_feature_name, top_coefficients, write_coefficients_csv

PIZZA = "\U0001f355"


def _model(weights: list[float], names: tuple[str, ...]) -> LinearSvmModel:
    return LinearSvmModel(np.asarray(weights), 0.0, 1.0, FeatureMetadata(text_terms=names))


def test_top_and_bottom_ranking() -> None:
    model = _model([0.5, -2.0, 3.0, 0.0, -0.1], ("beer", "yoga", "golf", "rent", "wine"))
    top, bottom = top_coefficients(model, 2)
    assert [c.name for c in top] == ["golf", "beer"]
    assert [c.name for c in bottom] == ["yoga", "wine"]
    assert top[0].label is ClassLabel.CLASS_A
    assert bottom[0].label is ClassLabel.CLASS_B


def test_k_zero_and_clipping() -> None:
    model = _model([1.0, -1.0], ("a", "b"))
    assert top_coefficients(model, 0) == ([], [])
    top, bottom = top_coefficients(model, 10)
    assert len(top) == len(bottom) == 2
    with pytest.raises(ValueError):
        top_coefficients(model, -1)


def test_zero_weights_rank_by_name() -> None:
    top, bottom = top_coefficients(_model([0.0, 0.0, 0.0], ("c", "a", "b")), 3)
    assert [c.name for c in top] == ["a", "b", "c"]
    assert [c.name for c in bottom] == ["a", "b", "c"]


def test_emoji_display_names() -> None:
    assert display_feature_name(PIZZA) == "_slice_of_pizza_"
    assert display_feature_name(f"pizza {PIZZA}") == "pizza _slice_of_pizza_"
    assert display_feature_name(":uber:") == ":uber:"


def test_coefficients_csv() -> None:
    model = _model([2.5, -1.0], (PIZZA, "yoga"))
    top, _ = top_coefficients(model, 1)
    buffer = io.StringIO()
    write_coefficients_csv(top, buffer)
    rows = list(csv.DictReader(io.StringIO(buffer.getvalue())))
    assert rows == [{"feature": "_slice_of_pizza_", "weight": "2.5", "class": "class_a"}]
    raw = io.StringIO()
    write_coefficients_csv(top, raw, raw_names=True)
    assert raw.getvalue().splitlines()[1].startswith(PIZZA)
