"""Coefficient rankings of a trained linear SVM, with readable names for emoji features."""

from __future__ import annotations

import csv
import re
import unicodedata
from dataclasses import dataclass
from typing import IO

import numpy as np

from venmo_latent.classifiers import LinearSvmModel
from venmo_latent.label import ClassLabel
from venmo_latent.tokens import EMOJI_PATTERN

_EMOJI = re.compile(EMOJI_PATTERN)
_MODIFIERS = {"\u200d", "\ufe0e", "\ufe0f", *map(chr, range(0x1F3FB, 0x1F400))}


@dataclass(frozen=True, slots=True)
class Coefficient:
    name: str
    display: str
    weight: float
    label: ClassLabel


def _emoji_name(surface: str) -> str:
    parts = []
    for ch in surface:
        if ch in _MODIFIERS:
            continue
        parts.append(unicodedata.name(ch, f"u{ord(ch):04x}").lower().replace(" ", "_").replace("-", "_"))
    return "_" + "_".join(parts) + "_"


def display_feature_name(name: str) -> str:
    """Render emoji parts of an n-gram as ``_slice_of_pizza_``; everything else is unchanged."""
    return " ".join(_emoji_name(part) if _EMOJI.fullmatch(part) else part for part in name.split(" "))


def top_coefficients(model: LinearSvmModel, k: int) -> tuple[list[Coefficient], list[Coefficient]]:
    """The ``k`` highest and ``k`` lowest weighted features, ties broken by feature name.

    ``k`` is clipped to the model width. Each list is ranked over every feature, so a list can
    hold weights of the other sign when fewer than ``k`` features lean its way.
    """
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    names = model.metadata.names if len(model.metadata) == model.width else [f"f{i}" for i in range(model.width)]
    weights = np.asarray(model.weights, dtype=np.float64)
    k = min(k, model.width)

    def entry(i: int) -> Coefficient:
        label = ClassLabel.CLASS_A if weights[i] >= 0 else ClassLabel.CLASS_B
        return Coefficient(names[i], display_feature_name(names[i]), float(weights[i]), label)

    order = range(model.width)
    positive = sorted(order, key=lambda i: (-weights[i], names[i]))[:k]
    negative = sorted(order, key=lambda i: (weights[i], names[i]))[:k]
    return [entry(i) for i in positive], [entry(i) for i in negative]


def write_coefficients_csv(rows: list[Coefficient], stream: IO[str], *, raw_names: bool = False) -> int:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["feature", "weight", "class"])
    for row in rows:
        writer.writerow([row.name if raw_names else row.display, repr(row.weight), row.label.value])
    return len(rows)
