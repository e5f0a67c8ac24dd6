"""Mock Venmo-style HTTP API over a local corpus.

Routes:
    /feed                          the current window of ``page_size`` public transactions
    /users/{id}/transactions       newest-first, ``before_id`` cursor pagination
    /profile/{username}            an HTML page embedding ``"user_id": "<id>"``

The feed starts at the newest ``page_size`` transactions and steps back one window per
``refresh_interval`` seconds, or on every request when the interval is 0, wrapping around
to the newest window after the oldest.
"""

from __future__ import annotations

import html
import json
import logging
import math
import threading
import time
import urllib.parse
from collections.abc import Iterable
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any

from venmo_latent.corpus import group_by_user, transaction_to_record
from venmo_latent.errors import HarvestError
from venmo_latent.harvest.ratelimit import TokenBucket
from venmo_latent.models import Corpus, Transaction
from venmo_latent.utils import slugify

logger = logging.getLogger(__name__)


class MockVenmoHandler(BaseHTTPRequestHandler):
    mock: "MockVenmoServer"  # set on the class by MockVenmoServer

    def log_message(self, format: str, *args: Any) -> None:  # noqa: A002
        logger.debug("mock %s", format % args)

    def send_json(self, data: Any, status: int = 200, headers: dict[str, str] | None = None) -> None:
        body = json.dumps(data, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        for name, value in (headers or {}).items():
            self.send_header(name, value)
        self.end_headers()
        self.wfile.write(body)

    def send_text(self, text: str, content_type: str = "text/html; charset=utf-8", status: int = 200) -> None:
        body = text.encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self) -> None:  # noqa: N802
        if not self.mock.admit():
            wait = self.mock.limiter.retry_after()
            self.send_json({"error": "rate limited"}, 429, {"Retry-After": f"{max(wait, 0.001):.3f}"})
            return
        parsed = urllib.parse.urlparse(self.path)
        parts = [urllib.parse.unquote(p) for p in parsed.path.split("/") if p]
        query = urllib.parse.parse_qs(parsed.query)

        if parts == ["feed"]:
            self.send_json(self.mock.feed_page())
        elif len(parts) == 3 and parts[0] == "users" and parts[2] == "transactions":
            self._handle_user(parts[1], query.get("before_id", [None])[0])
        elif len(parts) == 2 and parts[0] == "profile":
            self._handle_profile(parts[1])
        else:
            self.send_json({"error": "not found"}, 404)

    def _handle_user(self, user_id: str, before_id: str | None) -> None:
        try:
            page = self.mock.user_page(user_id, before_id)
        except KeyError:
            self.send_json({"error": f"user {user_id} not found"}, 404)
            return
        except ValueError as exc:
            self.send_json({"error": str(exc)}, 400)
            return
        self.send_json(page)

    def _handle_profile(self, username: str) -> None:
        body = self.mock.profile_html(username)
        if body is None:
            self.send_text("<html><body>Sorry, this page isn't available.</body></html>", status=404)
            return
        self.send_text(body)


class MockVenmoServer:
    def __init__(
        self,
        source: Corpus | Iterable[Transaction],
        *,
        page_size: int = 20,
        refresh_interval: float = 900.0,
        rate_limit: float = 0.0,
        burst: int = 10,
        host: str = "127.0.0.1",
        port: int = 0,
        usernames: dict[str, str] | None = None,
        extra_users: dict[str, str] | None = None,
        profile_embeds_id: bool = True,
    ) -> None:
        if page_size < 1:
            raise ValueError(f"page_size must be at least 1, got {page_size}")
        corpus = source if isinstance(source, Corpus) else group_by_user(source)
        self.page_size = page_size
        self.refresh_interval = refresh_interval
        self.profile_embeds_id = profile_embeds_id
        self.limiter = TokenBucket(rate_limit, burst)

        self._chronological = sorted(corpus.transactions.values(), key=lambda t: t.sort_key)
        self._timelines: dict[str, list[Transaction]] = {
            user_id: [post.transaction for post in reversed(profile.posts)]
            for user_id, profile in corpus.users.items()
        }
        self._names = {user_id: profile.display_name for user_id, profile in corpus.users.items()}
        for user_id, name in (extra_users or {}).items():
            self._timelines.setdefault(user_id, [])
            self._names.setdefault(user_id, name)
        self.usernames = usernames if usernames is not None else self._default_usernames()

        self._lock = threading.Lock()
        self._feed_polls = 0
        self._started = time.monotonic()
        self.requests_served = 0
        self.throttled = 0

        handler_class = type("BoundMockVenmoHandler", (MockVenmoHandler,), {"mock": self})
        try:
            self.httpd = ThreadingHTTPServer((host, port), handler_class)
        except OSError as exc:
            raise HarvestError(f"cannot bind mock server to {host}:{port}: {exc}") from exc
        self.host = host
        self.port: int = self.httpd.server_address[1]
        self._thread: threading.Thread | None = None

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def _default_usernames(self) -> dict[str, str]:
        usernames: dict[str, str] = {}
        for user_id in sorted(self._names):
            base = slugify(self._names[user_id], default=user_id)
            candidate, suffix = base, 2
            while candidate in usernames:
                candidate, suffix = f"{base}-{suffix}", suffix + 1
            usernames[candidate] = user_id
        return usernames

    def admit(self) -> bool:
        allowed = self.limiter.try_acquire()
        with self._lock:
            if allowed:
                self.requests_served += 1
            else:
                self.throttled += 1
        return allowed

    def _window_index(self) -> int:
        n_windows = max(1, math.ceil(len(self._chronological) / self.page_size))
        with self._lock:
            if self.refresh_interval <= 0:
                index = self._feed_polls
            else:
                index = int((time.monotonic() - self._started) // self.refresh_interval)
            self._feed_polls += 1
        return index % n_windows

    def feed_page(self) -> dict[str, Any]:
        # window 0 is the newest page; later refreshes walk back in time
        end = len(self._chronological) - self._window_index() * self.page_size
        window = self._chronological[max(0, end - self.page_size) : end]
        return {"data": [transaction_to_record(t) for t in reversed(window)], "next_before_id": None}

    def user_page(self, user_id: str, before_id: str | None) -> dict[str, Any]:
        timeline = self._timelines[user_id]
        start = 0
        if before_id is not None:
            positions = [i for i, t in enumerate(timeline) if t.id == before_id]
            if not positions:
                raise ValueError(f"unknown before_id {before_id}")
            start = positions[0] + 1
        page = timeline[start : start + self.page_size]
        more = start + self.page_size < len(timeline)
        return {
            "data": [transaction_to_record(t) for t in page],
            "next_before_id": page[-1].id if more and page else None,
        }

    def profile_html(self, username: str) -> str | None:
        user_id = self.usernames.get(username)
        if user_id is None:
            return None
        name = self._names.get(user_id, username)
        script = (
            f'<script>window.__PROFILE__ = {json.dumps({"user_id": user_id, "display_name": name})};</script>'
            if self.profile_embeds_id
            else "<script>window.__PROFILE__ = {};</script>"
        )
        return f"<html><head><title>{html.escape(name)}</title>{script}</head><body><h1>@{html.escape(username)}</h1></body></html>"

    def serve_forever_in_thread(self) -> None:
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self._thread.start()

    def shutdown(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()


def run_mock_server(
    corpus: Corpus | Iterable[Transaction],
    *,
    page_size: int = 20,
    refresh_interval: float = 900.0,
    rate_limit: float = 0.0,
    burst: int = 10,
    host: str = "127.0.0.1",
    port: int = 0,
    **kwargs: Any,
) -> MockVenmoServer:
    """Start a mock server on a background thread and return its handle."""
    server = MockVenmoServer(
        corpus,
        page_size=page_size,
        refresh_interval=refresh_interval,
        rate_limit=rate_limit,
        burst=burst,
        host=host,
        port=port,
        **kwargs,
    )
    server.serve_forever_in_thread()
    logger.info("mock server listening on %s", server.url)
    return server
