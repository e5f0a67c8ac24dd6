from __future__ import annotations

import io
import time
from pathlib import Path

import pytest

from venmo_latent.corpus import group_by_user
from venmo_latent.errors import MalformedLabels, MissingLabels, UnknownRegion
from venmo_latent.label import (
    ClassLabel,
    GenderGuess,
    LabeledUser,
    LabelTask,
    NameCorpus,
    build_labeled_dataset,
    categorize,
    extract_first_name,
    guess_gender,
    guess_users,
    label_breakdown,
    load_name_corpus,
    load_political_labels,
    read_labels,
    write_labels,
)
from venmo_latent.models import Corpus, UserProfile

NAMES_TSV = """name\tregion\tmale_count\tfemale_count
alex\tUS\t50\t50
bob\tUS\t100\t0
mary\tUS\t0\t100
sam\tUS\t80\t20
kim\tUS\t10\t90
jean\tUS\t5\t95
jean\tFR\t100\t0
"""


@pytest.fixture
def names(tmp_path: Path):
    path = tmp_path / "names.tsv"
    path.write_text(NAMES_TSV, encoding="utf-8")
    return load_name_corpus(path)


@pytest.mark.parametrize(
    ("display", "first"),
    [("Mary-Jane Smith", "maryjane"), ("\U0001f525\U0001f525", ""), ("bob", "bob"), ("  ", ""), ("O'Brien Jr", "obrien")],
)
def test_extract_first_name(display: str, first: str) -> None:
    assert extract_first_name(display) == first


@pytest.mark.parametrize(
    ("name", "expected"),
    [
        ("bob", GenderGuess.MALE),
        ("mary", GenderGuess.FEMALE),
        ("alex", GenderGuess.ANDY),
        ("sam", GenderGuess.MOSTLY_MALE),
        ("kim", GenderGuess.MOSTLY_FEMALE),
        ("zed", GenderGuess.UNKNOWN),
        ("BOB", GenderGuess.MALE),
    ],
)
def test_guess_gender_categories(names, name: str, expected: GenderGuess) -> None:
    assert guess_gender(name, names, "US") is expected


@pytest.mark.parametrize(
    ("fraction", "expected"),
    [
        (1.0, GenderGuess.MALE),
        (0.95, GenderGuess.MALE),
        (0.7, GenderGuess.MOSTLY_MALE),
        (0.5, GenderGuess.ANDY),
        (0.3, GenderGuess.MOSTLY_FEMALE),
        (0.05, GenderGuess.FEMALE),
        (0.0, GenderGuess.FEMALE),
    ],
)
def test_category_thresholds(fraction: float, expected: GenderGuess) -> None:
    assert categorize(fraction) is expected


def test_regions(names) -> None:
    assert guess_gender("jean", names, "US") is GenderGuess.FEMALE
    assert guess_gender("jean", names, "FR") is GenderGuess.MALE
    # 105 male of 200 over all regions
    assert guess_gender("jean", names, "*") is GenderGuess.ANDY
    assert guess_gender("bob", names, "FR") is GenderGuess.UNKNOWN
    with pytest.raises(UnknownRegion):
        guess_gender("bob", names, "XX")


def _letters(i: int) -> str:
    word = ""
    while True:
        i, rest = divmod(i, 26)
        word += chr(ord("a") + rest)
        if i == 0:
            return word


def test_labelling_scales_with_a_national_name_file() -> None:
    names = NameCorpus()
    for i in range(100_000):
        names.add(_letters(i), "US", i % 7, 6 - i % 7)
    names.add("bob", "CA", 10, 0)
    assert names.regions == ["CA", "US"]
    profiles = {
        f"u{i}": UserProfile(user_id=f"u{i}", display_name=f"{_letters(i * 13).title()} Smith") for i in range(5_000)
    }
    started = time.perf_counter()
    guesses = guess_users(Corpus(users=profiles), names, "US")
    assert time.perf_counter() - started < 5.0
    assert len(guesses) == 5_000
    assert GenderGuess.UNKNOWN not in guesses.values()
    with pytest.raises(UnknownRegion):
        guess_users(Corpus(users=profiles), names, "FR")


def test_bundled_name_corpus() -> None:
    bundled = load_name_corpus()
    assert "US" in bundled.regions
    assert guess_gender("james", bundled) is GenderGuess.MALE


def test_name_corpus_header_is_checked(tmp_path: Path) -> None:
    path = tmp_path / "bad.tsv"
    path.write_text("first\tcount\nbob\t1\n", encoding="utf-8")
    with pytest.raises(MalformedLabels):
        load_name_corpus(path)


def test_gender_dataset_keeps_only_male_and_female(make_transaction, names) -> None:
    corpus = group_by_user(
        [
            make_transaction("u1", "u2", actor_name="Bob Smith", target_name="Alex Jones"),
            make_transaction("u3", "u4", actor_name="Mary Brown", target_name="Sam Green"),
        ]
    )
    labeled = build_labeled_dataset(corpus, LabelTask.GENDER, names=names)
    assert labeled == [
        LabeledUser("u1", ClassLabel.CLASS_A, LabelTask.GENDER),
        LabeledUser("u3", ClassLabel.CLASS_B, LabelTask.GENDER),
    ]


def test_politics_dataset(make_transaction, tmp_path: Path) -> None:
    transactions = [make_transaction(f"d{i:03d}", f"r{i:03d}") for i in range(218)]
    corpus = group_by_user(transactions)
    rows = ["user_id,label"]
    rows += [f"d{i:03d},democrat" for i in range(218)]
    rows += [f"r{i:03d},Republican" for i in range(218)]
    rows.append("absent,democrat")
    path = tmp_path / "politics.csv"
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")

    labeled = build_labeled_dataset(corpus, "politics", political_labels=load_political_labels(path))
    assert len(labeled) == 436
    counts = _class_counts(labeled)
    assert counts == {ClassLabel.CLASS_A: 218, ClassLabel.CLASS_B: 218}
    assert {u.user_id for u in labeled if u.label is ClassLabel.CLASS_A} == {f"d{i:03d}" for i in range(218)}


def _class_counts(labeled: list[LabeledUser]) -> dict[ClassLabel, int]:
    return {label: sum(1 for u in labeled if u.label is label) for label in ClassLabel}


def test_empty_corpus_gives_no_labels(names) -> None:
    assert build_labeled_dataset(Corpus(), LabelTask.GENDER, names=names) == []
    assert build_labeled_dataset(Corpus(), LabelTask.POLITICS, political_labels={}) == []


def test_politics_needs_labels() -> None:
    with pytest.raises(MissingLabels):
        build_labeled_dataset(Corpus(), LabelTask.POLITICS)


def test_unknown_political_label(tmp_path: Path) -> None:
    path = tmp_path / "politics.csv"
    path.write_text("user_id,label\nu1,green\n", encoding="utf-8")
    with pytest.raises(MalformedLabels):
        load_political_labels(path)


def test_breakdown_lists_every_category() -> None:
    breakdown = label_breakdown([GenderGuess.MALE, GenderGuess.MALE, GenderGuess.ANDY])
    assert breakdown[GenderGuess.MALE] == 2
    assert breakdown[GenderGuess.ANDY] == 1
    assert breakdown[GenderGuess.UNKNOWN] == 0
    assert set(breakdown) == set(GenderGuess)


def test_labels_file(tmp_path: Path) -> None:
    labeled = [
        LabeledUser("u1", ClassLabel.CLASS_A, LabelTask.GENDER),
        LabeledUser("u2", ClassLabel.CLASS_B, LabelTask.POLITICS),
    ]
    buffer = io.StringIO()
    assert write_labels(buffer, labeled) == 2
    assert buffer.getvalue().splitlines()[0] == "user_id,label,task"
    path = tmp_path / "labels.csv"
    path.write_text(buffer.getvalue(), encoding="utf-8")
    assert read_labels(path) == labeled


def test_malformed_labels_file(tmp_path: Path) -> None:
    path = tmp_path / "labels.csv"
    path.write_text("user_id,label,task\nu1,class_c,gender\n", encoding="utf-8")
    with pytest.raises(MalformedLabels):
        read_labels(path)
    with pytest.raises(MissingLabels):
        read_labels(tmp_path / "missing.csv")
