"""Ground-truth labels: name-based gender guesses and externally supplied political labels."""

from __future__ import annotations

import csv
import io
import logging
import unicodedata
from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import IO

from venmo_latent.errors import MalformedLabels, MissingLabels, UnknownRegion
from venmo_latent.lexicons import bundled_names_text
from venmo_latent.models import Corpus

logger = logging.getLogger(__name__)

ALL_REGIONS = "*"


class GenderGuess(StrEnum):
    UNKNOWN = "unknown"
    ANDY = "andy"
    MALE = "male"
    FEMALE = "female"
    MOSTLY_MALE = "mostly_male"
    MOSTLY_FEMALE = "mostly_female"


class LabelTask(StrEnum):
    GENDER = "gender"
    POLITICS = "politics"


class ClassLabel(StrEnum):
    CLASS_A = "class_a"
    CLASS_B = "class_b"


GENDER_CLASSES = {GenderGuess.MALE: ClassLabel.CLASS_A, GenderGuess.FEMALE: ClassLabel.CLASS_B}
POLITICS_CLASSES = {"democrat": ClassLabel.CLASS_A, "republican": ClassLabel.CLASS_B}


@dataclass(frozen=True, slots=True)
class LabeledUser:
    user_id: str
    label: ClassLabel
    task: LabelTask


@dataclass
class NameCorpus:
    counts: dict[str, dict[str, tuple[int, int]]] = field(default_factory=dict)
    region_set: set[str] = field(init=False, default_factory=set)

    def __post_init__(self) -> None:
        self.region_set = {region for by_region in self.counts.values() for region in by_region}

    @property
    def regions(self) -> list[str]:
        return sorted(self.region_set)

    def add(self, name: str, region: str, male: int, female: int) -> None:
        previous = self.counts.setdefault(name, {}).get(region, (0, 0))
        self.counts[name][region] = (previous[0] + male, previous[1] + female)
        self.region_set.add(region)

    def male_fraction(self, name: str, region: str) -> float | None:
        by_region = self.counts.get(name.strip().lower())
        if not by_region:
            return None
        if region == ALL_REGIONS:
            male = sum(m for m, _ in by_region.values())
            female = sum(f for _, f in by_region.values())
        elif region in by_region:
            male, female = by_region[region]
        else:
            return None
        total = male + female
        return male / total if total else None


def load_name_corpus(path: Path | None = None) -> NameCorpus:
    """Read a ``name, region, male_count, female_count`` TSV; the bundled sample by default."""
    text = path.read_text(encoding="utf-8") if path is not None else bundled_names_text()
    reader = csv.DictReader(io.StringIO(text), delimiter="\t")
    required = {"name", "region", "male_count", "female_count"}
    if reader.fieldnames is None or not required <= set(reader.fieldnames):
        raise MalformedLabels(f"name corpus header must contain {sorted(required)}")
    corpus = NameCorpus()
    for row_number, row in enumerate(reader, 2):
        try:
            male, female = int(row["male_count"]), int(row["female_count"])
        except (TypeError, ValueError) as exc:
            raise MalformedLabels(f"name corpus line {row_number}: {exc}") from exc
        if male < 0 or female < 0:
            raise MalformedLabels(f"name corpus line {row_number}: negative count")
        name = (row["name"] or "").strip().lower()
        region = (row["region"] or "").strip()
        if not name or not region:
            continue
        corpus.add(name, region, male, female)
    return corpus


def extract_first_name(display_name: str) -> str:
    parts = unicodedata.normalize("NFC", display_name).split()
    if not parts:
        return ""
    return "".join(ch for ch in parts[0] if ch.isalpha()).lower()


def categorize(male_fraction: float) -> GenderGuess:
    m = male_fraction
    if m >= 0.95:
        return GenderGuess.MALE
    if m >= 0.7:
        return GenderGuess.MOSTLY_MALE
    if m > 0.3:
        return GenderGuess.ANDY
    if m > 0.05:
        return GenderGuess.MOSTLY_FEMALE
    return GenderGuess.FEMALE


def guess_gender(first_name: str, corpus: NameCorpus, region: str = "US") -> GenderGuess:
    if region != ALL_REGIONS and region not in corpus.region_set:
        raise UnknownRegion(f"region {region!r} not in name corpus (known: {', '.join(corpus.regions)})")
    fraction = corpus.male_fraction(first_name, region)
    if fraction is None:
        return GenderGuess.UNKNOWN
    return categorize(fraction)


def guess_users(corpus: Corpus, names: NameCorpus, region: str = "US") -> dict[str, GenderGuess]:
    return {
        user_id: guess_gender(extract_first_name(profile.display_name), names, region)
        for user_id, profile in corpus.users.items()
    }


def load_political_labels(path: Path) -> dict[str, str]:
    """Read a ``user_id,label`` CSV with labels ``republican`` or ``democrat``."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MissingLabels(f"cannot read political labels {path}: {exc}") from exc
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or not {"user_id", "label"} <= set(reader.fieldnames):
        raise MalformedLabels(f"{path}: header must contain user_id,label")
    labels: dict[str, str] = {}
    for row_number, row in enumerate(reader, 2):
        label = (row["label"] or "").strip().lower()
        if label not in POLITICS_CLASSES:
            raise MalformedLabels(f"{path} line {row_number}: unknown political label {row['label']!r}")
        labels[(row["user_id"] or "").strip()] = label
    return labels


def build_labeled_dataset(
    corpus: Corpus,
    task: LabelTask | str,
    *,
    names: NameCorpus | None = None,
    region: str = "US",
    political_labels: dict[str, str] | None = None,
) -> list[LabeledUser]:
    """Label the corpus users for one task, dropping users without a usable label.

    Gender keeps strict male and female guesses only. Politics joins on the supplied labels.
    """
    task = LabelTask(task)
    labeled: list[LabeledUser] = []
    if task is LabelTask.GENDER:
        guesses = guess_users(corpus, names if names is not None else load_name_corpus(), region)
        for user_id, guess in guesses.items():
            if guess in GENDER_CLASSES:
                labeled.append(LabeledUser(user_id, GENDER_CLASSES[guess], task))
        logger.info("gender labels: kept %d of %d users", len(labeled), len(guesses))
        return labeled
    if political_labels is None:
        raise MissingLabels("politics task needs a user_id,label file")
    for user_id in corpus.users:
        if user_id in political_labels:
            labeled.append(LabeledUser(user_id, POLITICS_CLASSES[political_labels[user_id]], task))
    logger.info("politics labels: matched %d of %d users", len(labeled), len(corpus.users))
    return labeled


def label_breakdown(guesses: Iterable[GenderGuess]) -> dict[GenderGuess, int]:
    counts = Counter(guesses)
    return {category: counts.get(category, 0) for category in GenderGuess}


def write_labels(stream: IO[str], labeled: Iterable[LabeledUser]) -> int:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["user_id", "label", "task"])
    count = 0
    for user in labeled:
        writer.writerow([user.user_id, user.label.value, user.task.value])
        count += 1
    return count


def read_labels(path: Path) -> list[LabeledUser]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise MissingLabels(f"cannot read labels {path}: {exc}") from exc
    labeled: list[LabeledUser] = []
    for row_number, row in enumerate(csv.DictReader(io.StringIO(text)), 2):
        try:
            labeled.append(LabeledUser(row["user_id"], ClassLabel(row["label"]), LabelTask(row["task"])))
        except (KeyError, ValueError) as exc:
            raise MalformedLabels(f"{path} line {row_number}: {exc}") from exc
    return labeled
