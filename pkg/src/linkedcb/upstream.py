"""Client for the upstream JSON API.

The API key travels as the ``user_key`` query parameter.  Every request start
goes through a :class:`RateGate`; by default one gate is shared by the whole
process because the upstream limit is per key, not per caller.
"""

from __future__ import annotations

import logging
import os
import re
import threading
import time
from typing import Iterator, Optional
from urllib.parse import parse_qsl, urlencode, urlsplit, urlunsplit

import requests

from .errors import (
    ForeignRedirectError,
    InvalidKeyError,
    RateExceededError,
    UnknownEntityError,
    UpstreamError,
    UpstreamParseError,
    WrongPayloadError,
)
from .transform import UpstreamEnvelope, parse_envelope

log = logging.getLogger(__name__)

DEFAULT_MIN_INTERVAL = 1.0
DEFAULT_UPSTREAM_BASE = "http://127.0.0.1:8088"

_USER_KEY_RE = re.compile(r"(user_key=)[^&\s\"']*")


def redact_query_keys(text: str) -> str:
    return _USER_KEY_RE.sub(r"\1***", text)


class _RedactKeysFilter(logging.Filter):
    """urllib3 logs request lines at DEBUG, query string (and key) included."""

    def filter(self, record):
        message = record.getMessage()
        if "user_key=" in message:
            record.msg, record.args = redact_query_keys(message), ()
        return True


logging.getLogger("urllib3.connectionpool").addFilter(_RedactKeysFilter())


class ApiKey:
    """Opaque upstream credential; its repr never shows the secret."""

    __slots__ = ("_secret",)

    def __init__(self, secret: str):
        if not isinstance(secret, str) or not secret:
            raise ValueError("API key must be a non-empty string")
        self._secret = secret

    @property
    def secret(self) -> str:
        return self._secret

    @classmethod
    def from_env(cls, var: str = "CB_API_KEY") -> Optional["ApiKey"]:
        value = os.environ.get(var)
        return cls(value) if value else None

    def redact(self, text: str) -> str:
        return text.replace(self._secret, "***")

    def __eq__(self, other):
        return isinstance(other, ApiKey) and other._secret == self._secret

    def __hash__(self):
        return hash(("ApiKey", self._secret))

    def __repr__(self):
        return "ApiKey(***)"

    __str__ = __repr__


class RateGate:
    """Spaces request starts at least ``min_interval`` seconds apart.

    Slots are handed out under a lock, the waiting happens outside it, so
    concurrent callers queue in arrival order.
    """

    def __init__(self, min_interval: float = DEFAULT_MIN_INTERVAL, clock=time.monotonic, sleep=time.sleep):
        if min_interval <= 0:
            raise ValueError("min_interval must be positive")
        self.min_interval = float(min_interval)
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._next = float("-inf")

    def acquire(self) -> float:
        with self._lock:
            now = self._clock()
            slot = max(now, self._next)
            self._next = slot + self.min_interval
        delay = slot - now
        if delay > 0:
            self._sleep(delay)
        return slot


_shared_gate: Optional[RateGate] = None
_shared_lock = threading.Lock()


def shared_gate(min_interval: Optional[float] = None) -> RateGate:
    """The process-wide gate; ``min_interval`` reconfigures it when given."""
    global _shared_gate
    with _shared_lock:
        if _shared_gate is None:
            _shared_gate = RateGate(min_interval or DEFAULT_MIN_INTERVAL)
        elif min_interval is not None:
            if min_interval <= 0:
                raise ValueError("min_interval must be positive")
            _shared_gate.min_interval = float(min_interval)
        return _shared_gate


class UpstreamClient:
    def __init__(
        self,
        base_url: Optional[str] = None,
        gate: Optional[RateGate] = None,
        max_attempts: int = 5,
        timeout: float = 30.0,
        session: Optional[requests.Session] = None,
    ):
        self.base_url = (base_url or os.environ.get("UPSTREAM_BASE") or DEFAULT_UPSTREAM_BASE).rstrip("/")
        self.gate = gate if gate is not None else shared_gate()
        self.max_attempts = max_attempts
        self.timeout = timeout
        if session is None:
            session = requests.Session()
            session.trust_env = False
        self.session = session
        parts = urlsplit(self.base_url)
        self._origin = (parts.scheme, parts.netloc.lower())
        self._prefix = parts.path.rstrip("/")

    def relative(self, url_or_path: str) -> str:
        """Path (plus query, minus any key) relative to the upstream base.

        Raises :class:`ForeignRedirectError` for absolute URLs on another host.
        """
        parts = urlsplit(url_or_path)
        if parts.scheme or parts.netloc:
            if (parts.scheme, parts.netloc.lower()) != self._origin:
                raise ForeignRedirectError(f"refusing to follow off-host URL {parts.scheme}://{parts.netloc}{parts.path}")
            path = parts.path
            if self._prefix and path.startswith(self._prefix + "/"):
                path = path[len(self._prefix):]
        else:
            path = parts.path
        query = [(k, v) for k, v in parse_qsl(parts.query, keep_blank_values=True) if k != "user_key"]
        rel = path.strip("/")
        return f"{rel}?{urlencode(query)}" if query else rel

    def _url(self, rel: str, key) -> str:
        parts = urlsplit(rel)
        query = parse_qsl(parts.query, keep_blank_values=True) + [("user_key", key.secret)]
        return urlunsplit(("", "", f"{self.base_url}/{parts.path}", urlencode(query), ""))

    def fetch(self, path: str, key: ApiKey) -> UpstreamEnvelope:
        rel = self.relative(path)
        url = self._url(rel, key)
        backoff = self.gate.min_interval
        for attempt in range(1, self.max_attempts + 1):
            self.gate.acquire()
            log.debug("GET %s (attempt %d)", rel, attempt)
            try:
                resp = self.session.get(url, timeout=self.timeout)
            except requests.RequestException as exc:
                raise UpstreamError(f"request for {rel} failed: {type(exc).__name__}", path=rel) from None
            status = resp.status_code
            if status == 429:
                log.info("429 on %s, backing off %.3fs", rel, backoff)
                time.sleep(backoff)
                backoff *= 2
                continue
            if status in (401, 403):
                raise InvalidKeyError(f"upstream rejected the API key for {rel}", path=rel)
            if status == 404:
                raise UnknownEntityError(f"unknown entity or collection: {rel}", path=rel)
            if status >= 400:
                raise UpstreamError(f"upstream answered {status} for {rel}", path=rel)
            try:
                return parse_envelope(resp.content)
            except (WrongPayloadError, UnicodeDecodeError) as exc:
                raise UpstreamParseError(key.redact(f"malformed body for {rel}: {exc}"), path=rel) from None
        raise RateExceededError(f"rate limit still exceeded after {self.max_attempts} attempts: {rel}", path=rel)

    def fetch_all_pages(self, path: str, key: ApiKey) -> Iterator[UpstreamEnvelope]:
        """Yield page 1 of a paged collection, then every ``next_page_url`` in turn."""
        index, target, seen, declared = 1, path, 0, None
        while target:
            try:
                env = self.fetch(target, key)
            except UpstreamError as exc:
                exc.page = index
                raise
            page = env.data
            items = getattr(page, "items", None)
            if items is None:
                raise UpstreamParseError(f"{self.relative(target)} is not a paged collection", path=target, page=index)
            if declared is None:
                declared = page.total_items
            seen += len(items)
            yield env
            target = page.next_page_url
            index += 1
        if declared is not None and seen != declared:
            log.warning("%s: %d items seen, %d declared", path, seen, declared)
