from __future__ import annotations

from datetime import datetime, timedelta, timezone
from typing import Callable

import pytest

from venmo_latent.models import Transaction, TransactionKind

BASE = datetime(2018, 3, 1, tzinfo=timezone.utc)

TransactionFactory = Callable[..., Transaction]


@pytest.fixture
def make_transaction() -> TransactionFactory:
    counter = iter(range(1, 1_000_000))

    def build(
        actor: str = "a",
        target: str = "b",
        note: str = "pizza",
        *,
        id: str | None = None,
        minutes: int | None = None,
        kind: TransactionKind = TransactionKind.PAYMENT,
        likes: int = 0,
        comments: int = 0,
        actor_name: str | None = None,
        target_name: str | None = None,
    ) -> Transaction:
        n = next(counter)
        return Transaction(
            id=id or f"t{n:04d}",
            created_at=BASE + timedelta(minutes=n if minutes is None else minutes),
            note=note,
            kind=kind,
            actor_id=actor,
            actor_name=actor_name or f"{actor.title()} Person",
            target_id=target,
            target_name=target_name or f"{target.title()} Person",
            likes_count=likes,
            comments_count=comments,
        )

    return build
