"""Thread-safe token bucket shared by harvest workers and the mock server."""

from __future__ import annotations

import threading
import time
from collections.abc import Callable


class TokenBucket:
    """Capacity ``burst``, refilled at ``rate`` tokens per second. ``rate <= 0`` disables limiting.

    Over any window of ``t`` seconds at most ``burst + rate * t`` tokens are handed out.
    """

    def __init__(
        self,
        rate: float,
        burst: int = 1,
        *,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        if burst < 1:
            raise ValueError(f"burst must be at least 1, got {burst}")
        self.rate = rate
        self.burst = burst
        self._clock = clock
        self._sleep = sleep
        self._tokens = float(burst)
        self._updated = clock()
        self._lock = threading.Lock()

    @property
    def unlimited(self) -> bool:
        return self.rate <= 0

    def _refill(self) -> None:
        now = self._clock()
        self._tokens = min(float(self.burst), self._tokens + (now - self._updated) * self.rate)
        self._updated = now

    def try_acquire(self) -> bool:
        if self.unlimited:
            return True
        with self._lock:
            self._refill()
            if self._tokens >= 1:
                self._tokens -= 1
                return True
            return False

    def retry_after(self) -> float:
        """Seconds until the next token is available; 0 when one is available now."""
        if self.unlimited:
            return 0.0
        with self._lock:
            self._refill()
            return max(0.0, (1 - self._tokens) / self.rate)

    def acquire(self) -> float:
        """Take one token, sleeping until it is due. Returns the time waited."""
        if self.unlimited:
            return 0.0
        with self._lock:
            self._refill()
            # reserve now, wait outside the lock; tokens may go negative
            self._tokens -= 1
            wait = max(0.0, -self._tokens / self.rate)
        if wait:
            self._sleep(wait)
        return wait
