from __future__ import annotations

import csv
import io
from pathlib import Path

import pytest

from venmo_latent.corpus import group_by_user
from venmo_latent.errors import EmptyProfile
from venmo_latent.features import (
    CONTENT_FEATURES,
    ContentCounts,
    ContentDetector,
    aggregate_user_features,
    detect_content_features,
    feature_columns,
    featurize_corpus,
    tokenize_profile,
    write_features_csv,
)
from venmo_latent.models import TransactionKind, UserProfile
from venmo_latent.tokens import tokenize_post

PIZZA = "\U0001f355"
BEER = "\U0001f37a"
CAKE = "\U0001f382"
FIRE = "\U0001f525"
FAMILY = "\U0001f469\u200d\U0001f469\u200d\U0001f467"

# note -> the non-zero content counts it must produce
GOLDEN: list[tuple[str, dict[str, int]]] = [
    ("", {}),
    ("heyyyy!!", {"repeated_chars": 1, "excitement": 1}),
    ("PIZZA NIGHT", {"shouting": 1}),
    ("omg hahaha :uber:", {"omg": 1, "laughing": 1, "venmo_emoji": 1}),
    ("thanks!", {"single_exclaim": 1}),
    ("thanks! ", {"single_exclaim": 1}),
    ("yay!!!!", {"excitement": 1}),
    ("yay!! so fun!!", {"excitement": 2}),
    ("wow! great!", {}),
    ("!thanks", {}),
    ("pizza :-)", {"emoticon": 1}),
    ("<3 <3", {"emoticon": 2}),
    ("lol", {"laughing": 1}),
    ("LOL", {"laughing": 1, "shouting": 1}),
    ("lmao dude", {"laughing": 1}),
    ("lololol", {}),
    ("haha", {"laughing": 1}),
    ("hehehe ok", {"laughing": 1}),
    ("ha", {}),
    ("omggg", {"omg": 1, "repeated_chars": 1}),
    ("OMG!!!", {"omg": 1, "shouting": 1, "excitement": 1}),
    ("omfg", {}),
    ("wait...", {"ellipses": 1}),
    ("wait..", {}),
    ("so\u2026 anyway", {"ellipses": 1}),
    ("a... b....", {"ellipses": 2}),
    ("bday.... \u2026", {"ellipses": 2}),
    (PIZZA, {"emoji": 1}),
    (PIZZA * 3, {"emoji": 3}),
    (FAMILY, {"emoji": 1}),
    ("rent \U0001f3e0\U0001f4b8", {"emoji": 2}),
    ("\u2764\ufe0f\u2764\ufe0f", {"emoji": 2}),
    ("for the trip \U0001f1fa\U0001f1f8", {"emoji": 1}),
    (":beer: :pizza:", {"venmo_emoji": 2}),
    ("UBER :uber:", {"venmo_emoji": 1}),
    ("shit", {"curse": 1}),
    ("what the hell", {"curse": 1}),
    ("hello there", {}),
    ("damn damn", {"curse": 2}),
    ("WTF", {"curse": 1, "shouting": 1}),
    ("shitty pizza :(", {"curse": 1, "emoticon": 1}),
    (f"fuckin awesome {FIRE}", {"curse": 1, "emoji": 1}),
    ("sooo good", {"repeated_chars": 1}),
    ("coffee", {}),
    ("Zzz", {"repeated_chars": 1}),
    ("OK!", {"shouting": 1, "single_exclaim": 1}),
    ("A", {}),
    ("$20 4 BEER", {"shouting": 1}),
    ("PIZZA night", {}),
    (f"BEER {BEER}", {"shouting": 1, "emoji": 1}),
    (f"{BEER} :-) lol!!", {"emoji": 1, "emoticon": 1, "laughing": 1, "excitement": 1}),
    ("xD", {"emoticon": 1}),
    ("XD", {"emoticon": 1, "shouting": 1}),
    ("dinner ;)", {"emoticon": 1}),
    (f"happy bday!!! {CAKE}{CAKE} :cake:", {"excitement": 1, "emoji": 2, "venmo_emoji": 1}),
    ("yesss!!! omg omg", {"repeated_chars": 1, "excitement": 1, "omg": 2}),
    ("heyyy :) how r u???", {"repeated_chars": 1, "emoticon": 1}),
    ("lol lol lol", {"laughing": 3}),
    ("goodnight :uber: ride home... zzz", {"venmo_emoji": 1, "ellipses": 1, "repeated_chars": 1}),
    ("BRUNCH w/ the girls \U0001f485", {"emoji": 1}),
]


def test_golden_table_is_large_and_covers_every_feature() -> None:
    assert len(GOLDEN) >= 50
    covered = {name for _, expected in GOLDEN for name in expected}
    assert covered == set(CONTENT_FEATURES)


@pytest.mark.parametrize(("note", "expected"), GOLDEN, ids=[f"golden-{i}" for i in range(len(GOLDEN))])
def test_detector_golden_table(note: str, expected: dict[str, int]) -> None:
    assert detect_content_features(tokenize_post(note)) == ContentCounts(**expected)


def test_custom_lexicons(tmp_path: Path) -> None:
    curse = tmp_path / "curse.txt"
    curse.write_text("# fruit on pizza\npineapple\n", encoding="utf-8")
    laughing = tmp_path / "laughing.txt"
    laughing.write_text("kek\n", encoding="utf-8")
    detector = ContentDetector(curse_words_path=curse, laughing_path=laughing)
    counts = detect_content_features(tokenize_post("Pineapple pizza kek lol haha"), detector=detector)
    assert counts.curse == 1
    # the lexicon is replaced, (ha|he) runs are always detected
    assert counts.laughing == 2


def _profile(make_transaction, notes: list[str], **kwargs) -> UserProfile:
    transactions = [make_transaction("a", f"x{i}", note, **kwargs) for i, note in enumerate(notes)]
    return group_by_user(transactions).users["a"]


def test_averages_and_presence(make_transaction) -> None:
    profile = _profile(make_transaction, [PIZZA * 2, "no emoji"])
    features = aggregate_user_features(profile, tokenize_profile(profile))
    assert features.avg_per_post["emoji"] == 1.0
    assert features.pct_posts_containing["emoji"] == 0.5
    assert features.avg_len_chars == (2 + 8) / 2
    assert features.avg_len_tokens == (2 + 2) / 2


def test_structural_features(make_transaction) -> None:
    transactions = [
        make_transaction("a", "b", likes=0, kind=TransactionKind.CHARGE),
        make_transaction("a", "c", likes=3, kind=TransactionKind.CHARGE),
        make_transaction("d", "a", likes=3, kind=TransactionKind.CHARGE),
    ]
    profile = group_by_user(transactions).users["a"]
    features = aggregate_user_features(profile, tokenize_profile(profile), include_pct_as_actor=True)
    assert features.pct_charge == 1.0
    assert features.avg_likes == 2.0
    assert features.pct_as_actor == pytest.approx(2 / 3)


def test_pct_as_actor_only_when_requested(make_transaction) -> None:
    profile = _profile(make_transaction, ["a", "b"])
    features = aggregate_user_features(profile, tokenize_profile(profile))
    assert features.pct_as_actor is None
    assert len(features.as_row()) == len(feature_columns())
    assert len(features.as_row(include_pct_as_actor=True)) == len(feature_columns(True))


def test_empty_profile_is_rejected() -> None:
    with pytest.raises(EmptyProfile):
        aggregate_user_features(UserProfile("ghost", "Ghost"), [])


def test_post_count_mismatch_is_rejected(make_transaction) -> None:
    profile = _profile(make_transaction, ["a", "b"])
    with pytest.raises(ValueError):
        aggregate_user_features(profile, [tokenize_post("a")])


def test_columns_are_stable() -> None:
    columns = feature_columns()
    assert columns[:4] == ["emoji_avg", "emoji_pct", "emoticon_avg", "emoticon_pct"]
    assert columns[-4:] == ["pct_charge", "avg_likes", "avg_len_chars", "avg_len_tokens"]
    assert feature_columns(True)[-1] == "pct_as_actor"


def test_featurize_corpus_writes_csv(make_transaction) -> None:
    corpus = group_by_user([make_transaction("a", "b", "lol!!"), make_transaction("b", "a", "PIZZA")])
    features = featurize_corpus(corpus)
    assert sorted(features) == ["a", "b"]
    buffer = io.StringIO()
    assert write_features_csv(sorted(features.items()), buffer) == 2
    rows = list(csv.DictReader(io.StringIO(buffer.getvalue())))
    assert [row["user_id"] for row in rows] == ["a", "b"]
    assert float(rows[0]["laughing_avg"]) == 0.5
    assert float(rows[0]["shouting_pct"]) == 0.5
