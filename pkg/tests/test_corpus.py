from __future__ import annotations

import io
import json
from pathlib import Path

import pytest

from venmo_latent.corpus import (
    dump_transactions,
    filter_min_posts,
    group_by_user,
    load_transactions,
    note_length_histogram,
    read_transactions,
    user_ids_from_transactions,
)
from venmo_latent.errors import MalformedRecord
from venmo_latent.models import Role, TransactionKind


def _record(txn_id: str, note: str = "pizza", actor: str = "u1", target: str = "u2", **extra) -> dict:
    record = {
        "id": txn_id,
        "date_created": "2018-05-01T12:00:00Z",
        "note": note,
        "type": "payment",
        "actor": {"id": actor, "name": "Alice Smith"},
        "target": {"id": target, "name": "Bob Jones"},
        "likes_count": 1,
        "comments_count": 0,
    }
    record.update(extra)
    return record


def _lines(*records: dict | str) -> list[bytes]:
    return [(r if isinstance(r, str) else json.dumps(r)).encode("utf-8") + b"\n" for r in records]


def test_well_formed_lines_load() -> None:
    result = load_transactions(_lines(_record("t1"), _record("t2"), _record("t3")))
    assert [t.id for t in result.transactions] == ["t1", "t2", "t3"]
    assert result.skipped == 0
    assert result.duplicates == 0


def test_duplicate_ids_keep_first_occurrence() -> None:
    result = load_transactions(_lines(_record("t1", note="first"), _record("t1", note="second")))
    assert len(result.transactions) == 1
    assert result.transactions[0].note == "first"
    assert result.duplicates == 1


def test_lenient_mode_counts_malformed_lines() -> None:
    records: list[dict | str] = [_record(f"t{i}") for i in range(9)]
    records.insert(4, "{not json")
    result = load_transactions(_lines(*records))
    assert len(result.transactions) == 9
    assert result.skipped == 1


@pytest.mark.parametrize(
    "bad",
    [
        _record("t1", type="refund"),
        _record("t1", actor="u1", target="u1"),
        _record("t1", likes_count=-1),
        {"id": "t1", "note": "missing fields"},
        _record("", note="empty id"),
    ],
)
def test_schema_violations_are_rejected(bad: dict) -> None:
    assert load_transactions(_lines(bad)).skipped == 1


def test_strict_mode_reports_line_number() -> None:
    with pytest.raises(MalformedRecord) as excinfo:
        load_transactions(_lines(_record("t1"), "", "[]"), strict=True)
    assert excinfo.value.line_number == 3
    assert excinfo.value.prefixed.startswith("corpus: line 3")


def test_null_note_and_naive_timestamp() -> None:
    result = load_transactions(_lines(_record("t1", note=None, date_created="2018-05-01T12:00:00")))
    transaction = result.transactions[0]
    assert transaction.note == ""
    assert transaction.created_at.utcoffset().total_seconds() == 0


def test_dump_then_read_preserves_transactions(tmp_path: Path) -> None:
    source = load_transactions(_lines(_record("t1", note="\U0001f355 night"), _record("t2", type="charge")))
    path = tmp_path / "corpus.jsonl"
    with path.open("w", encoding="utf-8") as handle:
        dump_transactions(source.transactions, handle)
    assert read_transactions(path).transactions == source.transactions
    assert read_transactions(path).transactions[1].kind is TransactionKind.CHARGE


def test_single_transaction_gives_two_users(make_transaction) -> None:
    corpus = group_by_user([make_transaction("a", "b")])
    assert sorted(corpus.users) == ["a", "b"]
    assert [p.role for p in corpus.users["a"].posts] == [Role.ACTOR]
    assert [p.role for p in corpus.users["b"].posts] == [Role.TARGET]


def test_roles_follow_chronology(make_transaction) -> None:
    first = make_transaction("a", "b", minutes=1)
    second = make_transaction("b", "a", minutes=2)
    corpus = group_by_user([second, first])
    assert [p.role for p in corpus.users["a"].posts] == [Role.ACTOR, Role.TARGET]
    assert [p.role for p in corpus.users["b"].posts] == [Role.TARGET, Role.ACTOR]


def test_grouping_is_order_independent(make_transaction) -> None:
    transactions = [make_transaction("a", "b"), make_transaction("c", "a"), make_transaction("b", "c")]
    assert group_by_user(transactions) == group_by_user(list(reversed(transactions)))


def test_display_name_comes_from_latest_post(make_transaction) -> None:
    corpus = group_by_user(
        [
            make_transaction("a", "b", minutes=1, actor_name="Old Name"),
            make_transaction("a", "b", minutes=2, actor_name="New Name"),
        ]
    )
    assert corpus.users["a"].display_name == "New Name"


def test_empty_list_gives_empty_corpus() -> None:
    corpus = group_by_user([])
    assert corpus.users == {}
    assert len(corpus) == 0


def test_histogram_counts_unique_notes_in_code_points(make_transaction) -> None:
    corpus = group_by_user([make_transaction(note="\U0001f355"), make_transaction(note="hi")])
    assert note_length_histogram(corpus) == {1: 1, 2: 1}
    assert note_length_histogram(group_by_user([])) == {}


def test_min_posts_filter(make_transaction) -> None:
    transactions = [make_transaction("a", f"x{i}") for i in range(6)]
    transactions += [make_transaction("b", "a"), make_transaction("b", "y")]
    corpus = group_by_user(transactions)
    assert len(corpus.users["a"].posts) == 7
    kept = filter_min_posts(corpus, 5)
    assert list(kept.users) == ["a"]
    assert filter_min_posts(corpus, 1).users == corpus.users
    with pytest.raises(ValueError):
        filter_min_posts(corpus, 0)


def test_user_with_four_posts_is_removed(make_transaction) -> None:
    corpus = group_by_user([make_transaction("a", f"x{i}") for i in range(4)])
    assert "a" not in filter_min_posts(corpus, 5).users


def test_user_ids_from_transactions(make_transaction) -> None:
    transactions = [make_transaction("b", "a"), make_transaction("c", "b")]
    assert user_ids_from_transactions(transactions) == ["a", "b", "c"]


def test_dump_is_one_line_per_transaction(make_transaction) -> None:
    buffer = io.StringIO()
    assert dump_transactions([make_transaction(), make_transaction()], buffer) == 2
    lines = buffer.getvalue().splitlines()
    assert len(lines) == 2
    assert json.loads(lines[0])["actor"]["id"] == "a"
