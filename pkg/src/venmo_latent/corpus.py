"""Transaction ingestion: line-delimited JSON records in, per-user corpus out."""

from __future__ import annotations

import json
import logging
from collections import Counter, defaultdict
from collections.abc import Iterable
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import IO, Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from venmo_latent.errors import MalformedRecord
from venmo_latent.models import (
    Audience,
    Corpus,
    Post,
    Role,
    Transaction,
    TransactionKind,
    UserProfile,
)
from venmo_latent.utils import as_utc, format_iso_datetime, parse_iso_datetime

logger = logging.getLogger(__name__)


class PartyRecord(BaseModel):
    model_config = ConfigDict(extra="ignore")

    id: str = Field(min_length=1)
    name: str = ""

    @field_validator("name", mode="before")
    @classmethod
    def _none_name(cls, value: Any) -> Any:
        return "" if value is None else value


class TransactionRecord(BaseModel):
    """Wire schema of one harvested transaction; unknown fields are ignored."""

    model_config = ConfigDict(extra="ignore")

    id: str = Field(min_length=1)
    date_created: datetime
    note: str = ""
    type: TransactionKind
    actor: PartyRecord
    target: PartyRecord
    likes_count: int = Field(default=0, ge=0)
    comments_count: int = Field(default=0, ge=0)
    audience: Audience = Audience.PUBLIC

    @field_validator("date_created", mode="before")
    @classmethod
    def _utc_timestamp(cls, value: Any) -> Any:
        if isinstance(value, str):
            return parse_iso_datetime(value)
        return value

    @field_validator("note", mode="before")
    @classmethod
    def _none_note(cls, value: Any) -> Any:
        return "" if value is None else value

    def to_transaction(self) -> Transaction:
        return Transaction(
            id=self.id,
            created_at=as_utc(self.date_created),
            note=self.note,
            kind=self.type,
            actor_id=self.actor.id,
            actor_name=self.actor.name,
            target_id=self.target.id,
            target_name=self.target.name,
            likes_count=self.likes_count,
            comments_count=self.comments_count,
            audience=self.audience,
        )


def transaction_to_record(transaction: Transaction) -> dict[str, Any]:
    return {
        "id": transaction.id,
        "date_created": format_iso_datetime(transaction.created_at),
        "note": transaction.note,
        "type": transaction.kind.value,
        "actor": {"id": transaction.actor_id, "name": transaction.actor_name},
        "target": {"id": transaction.target_id, "name": transaction.target_name},
        "likes_count": transaction.likes_count,
        "comments_count": transaction.comments_count,
        "audience": transaction.audience.value,
    }


def parse_record(obj: Any) -> Transaction:
    """Validate one decoded JSON object; raises ``ValueError`` on schema violations."""
    record = TransactionRecord.model_validate(obj)
    return record.to_transaction()


@dataclass
class LoadResult:
    transactions: list[Transaction] = field(default_factory=list)
    skipped: int = 0
    duplicates: int = 0


def load_transactions(source: IO[bytes] | Iterable[bytes], *, strict: bool = False) -> LoadResult:
    """Parse line-delimited transaction records, keeping the first occurrence of each id.

    Lenient mode counts and skips malformed lines; strict mode raises ``MalformedRecord`` on
    the first one. Blank lines are ignored in both modes.
    """
    result = LoadResult()
    seen: set[str] = set()
    for line_number, raw in enumerate(source, 1):
        try:
            line = raw.decode("utf-8").strip() if isinstance(raw, bytes) else str(raw).strip()
        except UnicodeDecodeError as exc:
            _reject(result, line_number, f"invalid UTF-8: {exc}", strict)
            continue
        if not line:
            continue
        try:
            transaction = parse_record(json.loads(line))
        except json.JSONDecodeError as exc:
            _reject(result, line_number, f"invalid JSON: {exc.msg}", strict)
            continue
        except (ValidationError, ValueError, TypeError) as exc:
            _reject(result, line_number, _first_error(exc), strict)
            continue
        if transaction.id in seen:
            result.duplicates += 1
            continue
        seen.add(transaction.id)
        result.transactions.append(transaction)
    if result.skipped:
        logger.warning("skipped %d malformed record(s)", result.skipped)
    return result


def _first_error(exc: Exception) -> str:
    if isinstance(exc, ValidationError):
        first = exc.errors()[0]
        where = ".".join(str(part) for part in first.get("loc", ()))
        return f"{where}: {first.get('msg', 'invalid value')}" if where else first.get("msg", "invalid")
    return str(exc)


def _reject(result: LoadResult, line_number: int, reason: str, strict: bool) -> None:
    if strict:
        raise MalformedRecord(line_number, reason)
    logger.debug("skipping line %d: %s", line_number, reason)
    result.skipped += 1


def read_transactions(path: Path, *, strict: bool = False) -> LoadResult:
    with path.open("rb") as handle:
        return load_transactions(handle, strict=strict)


def dump_transactions(transactions: Iterable[Transaction], stream: IO[str]) -> int:
    count = 0
    for transaction in transactions:
        stream.write(json.dumps(transaction_to_record(transaction), ensure_ascii=False) + "\n")
        count += 1
    return count


def write_transactions(path: Path, transactions: Iterable[Transaction]) -> int:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        return dump_transactions(transactions, handle)


def group_by_user(transactions: Iterable[Transaction]) -> Corpus:
    """Index every transaction under its actor and its target.

    Posts are ordered by ``created_at`` then id, so the result does not depend on input order.
    Display names come from the user's most recent post.
    """
    unique: dict[str, Transaction] = {}
    for transaction in transactions:
        unique.setdefault(transaction.id, transaction)
    ordered = sorted(unique.values(), key=lambda t: t.sort_key)

    posts: dict[str, list[Post]] = defaultdict(list)
    names: dict[str, str] = {}
    for transaction in ordered:
        posts[transaction.actor_id].append(Post(transaction, Role.ACTOR))
        posts[transaction.target_id].append(Post(transaction, Role.TARGET))
        names[transaction.actor_id] = transaction.actor_name
        names[transaction.target_id] = transaction.target_name

    users = {
        user_id: UserProfile(user_id=user_id, display_name=names[user_id], posts=tuple(posts[user_id]))
        for user_id in sorted(posts)
    }
    return Corpus(transactions={t.id: t for t in ordered}, users=users)


def note_length_histogram(corpus: Corpus) -> dict[int, int]:
    """Count note lengths in Unicode scalar values over the corpus' unique transactions."""
    counts = Counter(len(transaction.note) for transaction in corpus.transactions.values())
    return dict(sorted(counts.items()))


def filter_min_posts(corpus: Corpus, min_posts: int) -> Corpus:
    if min_posts < 1:
        raise ValueError(f"min_posts must be >= 1, got {min_posts}")
    users = {uid: profile for uid, profile in corpus.users.items() if len(profile.posts) >= min_posts}
    return Corpus(transactions=corpus.transactions, users=users)


def user_ids_from_transactions(transactions: Iterable[Transaction]) -> list[str]:
    ids: set[str] = set()
    for transaction in transactions:
        ids.add(transaction.actor_id)
        ids.add(transaction.target_id)
    return sorted(ids)
