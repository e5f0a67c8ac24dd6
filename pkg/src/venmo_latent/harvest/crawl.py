"""Phase-two crawl: fetch every public transaction of each discovered user, with checkpoints."""

from __future__ import annotations

import json
import logging
import threading
from collections.abc import Callable, Iterable
from concurrent.futures import FIRST_EXCEPTION, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from venmo_latent.errors import HarvestError, UserNotFound
from venmo_latent.harvest.client import PageHook, VenmoClient
from venmo_latent.models import Transaction
from venmo_latent.utils import atomic_write_json, now_iso

logger = logging.getLogger(__name__)

Sink = Callable[[list[Transaction]], None]


@dataclass
class CrawlState:
    seen: set[str] = field(default_factory=set)
    pending: list[str] = field(default_factory=list)
    completed: set[str] = field(default_factory=set)
    checkpoint_at: str | None = None

    @classmethod
    def fresh(cls, user_ids: Iterable[str]) -> "CrawlState":
        return cls(pending=list(dict.fromkeys(user_ids)))

    def to_dict(self) -> dict[str, Any]:
        return {
            "seen": sorted(self.seen),
            "completed": sorted(self.completed),
            "pending": list(self.pending),
            "checkpoint_at": self.checkpoint_at,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "CrawlState":
        completed = set(data.get("completed", []))
        pending = [uid for uid in data.get("pending", []) if uid not in completed]
        return cls(
            seen=set(data.get("seen", [])),
            pending=pending,
            completed=completed,
            checkpoint_at=data.get("checkpoint_at"),
        )

    @classmethod
    def load(cls, path: Path) -> "CrawlState":
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise HarvestError(f"cannot read checkpoint {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise HarvestError(f"checkpoint {path} must contain an object")
        return cls.from_dict(data)

    def save(self, path: Path) -> None:
        atomic_write_json(path, self.to_dict())

    def complete(self, user_id: str) -> None:
        if user_id in self.pending:
            self.pending.remove(user_id)
        self.completed.add(user_id)


@dataclass
class CrawlResult:
    users_completed: int = 0
    transactions_written: int = 0
    stopped_early: bool = False


def crawl_users(
    client: VenmoClient,
    state: CrawlState,
    *,
    sink: Sink,
    workers: int = 8,
    checkpoint: Path | None = None,
    max_users: int | None = None,
    on_page: PageHook | None = None,
) -> CrawlResult:
    """Crawl the pending users of ``state`` on a bounded thread pool.

    A user counts as done only once all of its pages are fetched; its unseen transactions then
    go to ``sink`` and the checkpoint is rewritten, all under one lock. An interrupted user stays
    pending and is fetched again from its first page on resume.
    """
    if workers < 1:
        raise ValueError(f"workers must be at least 1, got {workers}")
    batch = list(state.pending if max_users is None else state.pending[:max_users])
    result = CrawlResult(stopped_early=len(batch) < len(state.pending))
    lock = threading.Lock()

    def finish(user_id: str, transactions: list[Transaction]) -> None:
        with lock:
            fresh = [t for t in transactions if t.id not in state.seen]
            if fresh:
                sink(fresh)
            state.seen.update(t.id for t in fresh)
            state.complete(user_id)
            state.checkpoint_at = now_iso()
            if checkpoint is not None:
                state.save(checkpoint)
            result.users_completed += 1
            result.transactions_written += len(fresh)

    def crawl_one(user_id: str) -> None:
        try:
            transactions = client.user_transactions(user_id, on_page=on_page)
        except UserNotFound:
            logger.warning("user %s not found; marking as completed", user_id)
            transactions = []
        finish(user_id, transactions)
        logger.debug("crawled %s: %d transactions", user_id, len(transactions))

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(crawl_one, user_id) for user_id in batch]
        _, not_done = wait(futures, return_when=FIRST_EXCEPTION)
        for future in not_done:
            future.cancel()
    for future in futures:
        if future.done() and not future.cancelled() and future.exception() is not None:
            raise future.exception()  # type: ignore[misc]
    logger.info(
        "crawl finished: %d users, %d new transactions, %d pending",
        result.users_completed,
        result.transactions_written,
        len(state.pending),
    )
    return result
