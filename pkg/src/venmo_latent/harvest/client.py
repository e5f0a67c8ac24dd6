"""HTTP client for the Venmo-style API: feed polling, per-user pagination and username lookup."""

from __future__ import annotations

import logging
import re
import threading
import time
from collections.abc import Callable
from dataclasses import dataclass
from typing import Any
from urllib.parse import quote

import requests
from pydantic import BaseModel, ConfigDict, ValidationError

from venmo_latent.corpus import parse_record
from venmo_latent.errors import HarvestError, MalformedPage, PatternNotFound, UnknownUsername, UserNotFound
from venmo_latent.harvest.ratelimit import TokenBucket
from venmo_latent.models import Transaction

logger = logging.getLogger(__name__)

USER_ID_PATTERN = re.compile(r'"user_id"\s*:\s*"([^"]+)"')
RETRYABLE_STATUS = {429, 500, 502, 503, 504}

PageHook = Callable[[str, int, "FeedPage"], None]


class FeedPageRecord(BaseModel):
    model_config = ConfigDict(extra="ignore")

    data: list[Any]
    next_before_id: str | None = None


@dataclass(frozen=True)
class FeedPage:
    transactions: list[Transaction]
    next_before_id: str | None = None

    @property
    def is_last(self) -> bool:
        return self.next_before_id is None


def parse_page(payload: Any, page_index: int) -> FeedPage:
    """Validate a page body; any schema or ordering violation is a ``MalformedPage``."""
    try:
        record = FeedPageRecord.model_validate(payload)
    except ValidationError as exc:
        raise MalformedPage(page_index, f"bad page envelope: {exc.errors()[0].get('msg', 'invalid')}") from exc
    transactions = []
    for position, item in enumerate(record.data):
        try:
            transactions.append(parse_record(item))
        except (ValidationError, ValueError, TypeError) as exc:
            raise MalformedPage(page_index, f"record {position}: {exc}") from exc
    keys = [t.sort_key for t in transactions]
    if any(newer < older for newer, older in zip(keys, keys[1:])):
        raise MalformedPage(page_index, "transactions are not sorted newest-first")
    return FeedPage(transactions, record.next_before_id)


class VenmoClient:
    def __init__(
        self,
        endpoint: str,
        *,
        limiter: TokenBucket | None = None,
        max_retries: int = 5,
        backoff_base: float = 0.5,
        timeout: float = 10.0,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.endpoint = endpoint.rstrip("/")
        self.limiter = limiter or TokenBucket(0)
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self.timeout = timeout
        self._sleep = sleep
        self._local = threading.local()
        self.requests_sent = 0
        self._count_lock = threading.Lock()

    @classmethod
    def from_config(cls, endpoint: str | None, harvest: Any) -> "VenmoClient":
        return cls(
            endpoint or harvest.endpoint,
            limiter=TokenBucket(harvest.rate_limit, harvest.burst),
            max_retries=harvest.max_retries,
            backoff_base=harvest.backoff_base,
            timeout=harvest.timeout,
        )

    @property
    def session(self) -> requests.Session:
        # one session per worker thread
        session = getattr(self._local, "session", None)
        if session is None:
            session = requests.Session()
            session.headers["Accept"] = "application/json"
            self._local.session = session
        return session

    def _backoff(self, attempt: int) -> float:
        return self.backoff_base * (2**attempt)

    def get(self, path: str, params: dict[str, str] | None = None) -> requests.Response:
        """GET with the shared rate limit; 429, 5xx and connection errors retry with backoff.

        Other responses, 404 included, are returned to the caller.
        """
        url = f"{self.endpoint}{path}"
        last_error = ""
        for attempt in range(self.max_retries + 1):
            self.limiter.acquire()
            with self._count_lock:
                self.requests_sent += 1
            try:
                response = self.session.get(url, params=params, timeout=self.timeout)
            except requests.RequestException as exc:
                last_error = str(exc)
                wait = self._backoff(attempt)
            else:
                if response.status_code not in RETRYABLE_STATUS:
                    return response
                last_error = f"HTTP {response.status_code}"
                wait = self._backoff(attempt)
                if response.status_code == 429:
                    try:
                        wait = max(wait, float(response.headers.get("Retry-After", "")))
                    except ValueError:
                        pass
            if attempt < self.max_retries:
                logger.warning("GET %s failed (%s); retry %d in %.2fs", path, last_error, attempt + 1, wait)
                self._sleep(wait)
        raise HarvestError(f"GET {url} failed after {self.max_retries + 1} attempt(s): {last_error}")

    def _json(self, response: requests.Response, page_index: int) -> Any:
        if response.status_code != 200:
            raise HarvestError(f"GET {response.url} returned HTTP {response.status_code}")
        try:
            return response.json()
        except ValueError as exc:
            raise MalformedPage(page_index, f"response is not JSON: {exc}") from exc

    def feed_page(self, page_index: int = 0) -> FeedPage:
        return parse_page(self._json(self.get("/feed"), page_index), page_index)

    def user_page(self, user_id: str, before_id: str | None = None, page_index: int = 0) -> FeedPage:
        params = {"before_id": before_id} if before_id else None
        response = self.get(f"/users/{quote(user_id, safe='')}/transactions", params)
        if response.status_code == 404:
            raise UserNotFound(f"user {user_id} not found")
        return parse_page(self._json(response, page_index), page_index)

    def user_transactions(
        self,
        user_id: str,
        *,
        on_page: PageHook | None = None,
    ) -> list[Transaction]:
        """Follow ``next_before_id`` until the last page; each transaction is returned once."""
        collected: dict[str, Transaction] = {}
        before_id: str | None = None
        page_index = 0
        while True:
            page = self.user_page(user_id, before_id, page_index)
            for transaction in page.transactions:
                collected.setdefault(transaction.id, transaction)
            if on_page is not None:
                on_page(user_id, page_index, page)
            if page.is_last:
                return list(collected.values())
            if page.next_before_id == before_id:
                raise MalformedPage(page_index, "cursor did not advance")
            before_id = page.next_before_id
            page_index += 1

    def profile_html(self, username: str) -> str:
        response = self.get(f"/profile/{quote(username, safe='')}")
        if response.status_code == 404:
            raise UnknownUsername(f"no profile for username {username!r}")
        if response.status_code != 200:
            raise HarvestError(f"profile {username!r} returned HTTP {response.status_code}")
        return response.text


def fetch_public_feed(
    endpoint: str,
    pages: int,
    *,
    poll_interval: float = 900.0,
    client: VenmoClient | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> list[Transaction]:
    """Poll the public feed ``pages`` times, waiting ``poll_interval`` between polls."""
    if pages < 1:
        raise ValueError(f"pages must be at least 1, got {pages}")
    client = client or VenmoClient(endpoint)
    collected: dict[str, Transaction] = {}
    for page_index in range(pages):
        if page_index and poll_interval > 0:
            sleep(poll_interval)
        page = client.feed_page(page_index)
        for transaction in page.transactions:
            collected.setdefault(transaction.id, transaction)
        logger.info("feed poll %d: %d transactions, %d unique so far", page_index, len(page.transactions), len(collected))
    return list(collected.values())


def fetch_user_transactions(
    endpoint: str,
    user_id: str,
    *,
    client: VenmoClient | None = None,
    on_page: PageHook | None = None,
) -> list[Transaction]:
    return (client or VenmoClient(endpoint)).user_transactions(user_id, on_page=on_page)


def resolve_user_id(endpoint: str, username: str, *, client: VenmoClient | None = None) -> str:
    """Find the user id embedded in a profile page."""
    body = (client or VenmoClient(endpoint)).profile_html(username)
    match = USER_ID_PATTERN.search(body)
    if match is None:
        raise PatternNotFound(f"profile of {username!r} does not embed a user id")
    return match.group(1)
