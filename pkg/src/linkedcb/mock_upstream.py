"""Fixture-driven stand-in for the upstream JSON API.

A fixture corpus is a directory tree ``<entity-type>/<permalink>.json``; each
file holds::

    {
      "uuid": "...",                      # optional
      "properties": {"name": "Facebook", "founded_on": "2004-02-04",
                     "founded_on_trust_code": 7, ...},
      "relationships": {"acquisitions": ["organizations/instagram",
                                         {"api_path": "people/ghost", "dangling": true}]}
    }

The server renders detail, index and relation envelopes from it, with paging
computed from ``page_size``.  Paging uses a ``page`` query parameter and
absolute ``next_page_url`` values.
"""

from __future__ import annotations

import argparse
import json
import logging
import threading
import time
import uuid as _uuid
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qsl, urlencode, urlsplit

from .errors import FixtureError
from .namespaces import ENTITY_TYPES
from .rdf import PERMALINK_RE
from .upstream import redact_query_keys
from .vocab import SNAKE_CASE_RE

log = logging.getLogger(__name__)

_WEB_SEGMENT = {name: local.lower() for name, local in ENTITY_TYPES.items()}


@dataclass
class RequestRecord:
    time: float
    method: str
    path: str
    query: dict
    status: int


@dataclass
class FixtureCorpus:
    entities: dict = field(default_factory=dict)  # type -> permalink -> fixture
    page_size: int = 8
    valid_keys: frozenset = frozenset()
    enforce_rate: bool = False
    rate_interval: float = 1.0

    @classmethod
    def from_directory(cls, path, **config) -> "FixtureCorpus":
        root = Path(path)
        if not root.is_dir():
            raise FixtureError(f"fixture directory not found: {root}")
        entities = {}
        for type_dir in sorted(p for p in root.iterdir() if p.is_dir()):
            for f in sorted(type_dir.glob("*.json")):
                with open(f, encoding="utf-8") as fh:
                    entities.setdefault(type_dir.name, {})[f.stem] = json.load(fh)
        corpus = cls(entities, **config)
        corpus.validate()
        return corpus

    def write_directory(self, path) -> None:
        root = Path(path)
        for etype, fixtures in self.entities.items():
            (root / etype).mkdir(parents=True, exist_ok=True)
            for permalink, fx in fixtures.items():
                with open(root / etype / f"{permalink}.json", "w", encoding="utf-8") as fh:
                    json.dump(fx, fh, indent=2, ensure_ascii=False)

    def get(self, etype: str, permalink: str) -> Optional[dict]:
        return self.entities.get(etype, {}).get(permalink)

    def relation_paths(self, fixture: dict, relation: str) -> list:
        items = (fixture.get("relationships") or {}).get(relation, [])
        return [i if isinstance(i, str) else i["api_path"] for i in items]

    def validate(self) -> None:
        if self.page_size < 1:
            raise FixtureError("page_size must be >= 1")
        for etype, fixtures in self.entities.items():
            if etype not in ENTITY_TYPES:
                raise FixtureError(f"unknown entity type directory: {etype}")
            for permalink, fx in fixtures.items():
                where = f"{etype}/{permalink}"
                if not PERMALINK_RE.match(permalink):
                    raise FixtureError(f"{where}: invalid permalink")
                for name, value in (fx.get("properties") or {}).items():
                    if isinstance(value, (dict, list)):
                        raise FixtureError(f"{where}: property {name} is not a scalar")
                for relation, items in (fx.get("relationships") or {}).items():
                    if not SNAKE_CASE_RE.match(relation):
                        raise FixtureError(f"{where}: bad relation name {relation!r}")
                    for item in items:
                        dangling = isinstance(item, dict) and item.get("dangling", False)
                        target = item if isinstance(item, str) else item.get("api_path", "")
                        parts = target.split("/")
                        if len(parts) != 2 or parts[0] not in ENTITY_TYPES or not PERMALINK_RE.match(parts[1]):
                            raise FixtureError(f"{where}: malformed api_path {target!r}")
                        if not dangling and self.get(*parts) is None:
                            raise FixtureError(f"{where}: {relation} -> {target} resolves to no fixture")


def _uuid_for(api_path: str) -> str:
    return str(_uuid.uuid5(_uuid.NAMESPACE_URL, "cb:" + api_path))


class MockUpstream:
    """Serves a :class:`FixtureCorpus` over HTTP and records every request."""

    def __init__(self, corpus: FixtureCorpus):
        corpus.validate()
        self.corpus = corpus
        self.url = "http://127.0.0.1"
        self._log = []
        self._log_lock = threading.Lock()
        self._last_served = float("-inf")
        self._server = None
        self._thread = None

    # -- request log -------------------------------------------------------

    @property
    def request_log(self) -> list:
        with self._log_lock:
            return list(self._log)

    def clear_log(self) -> None:
        with self._log_lock:
            self._log.clear()

    # -- rendering -----------------------------------------------------------

    def _stub(self, api_path: str, with_name: bool = False) -> dict:
        etype, permalink = api_path.split("/")
        props = {
            "permalink": permalink,
            "api_path": api_path,
            "web_path": f"{_WEB_SEGMENT[etype]}/{permalink}",
        }
        fx = self.corpus.get(etype, permalink)
        if with_name and fx and "name" in (fx.get("properties") or {}):
            props["name"] = fx["properties"]["name"]
        return {
            "type": ENTITY_TYPES[etype] + ("Summary" if with_name else ""),
            "uuid": (fx or {}).get("uuid") or _uuid_for(api_path),
            "properties": props,
        }

    def _page_url(self, path: str, page: int) -> str:
        return f"{self.url}/{path}?{urlencode({'page': page})}" if page > 1 else f"{self.url}/{path}"

    def _paging(self, path: str, total: int, page: int) -> dict:
        size = self.corpus.page_size
        pages = max(1, -(-total // size))
        return {
            "total_items": total,
            "number_of_pages": pages,
            "current_page": page,
            "items_per_page": size,
            "first_page_url": self._page_url(path, 1),
            "next_page_url": self._page_url(path, page + 1) if page < pages else None,
            "prev_page_url": self._page_url(path, page - 1) if page > 1 else None,
            "sort_order": "created_at DESC",
        }

    def _metadata(self) -> dict:
        return {
            "version": 31,
            "www_path_prefix": "https://www.crunchbase.com/",
            "api_path_prefix": self.url + "/",
            "image_path_prefix": "https://res.cloudinary.com/crunchbase-production/",
        }

    def _page_of(self, path: str, paths: list, page: int) -> dict:
        size = self.corpus.page_size
        chunk = paths[(page - 1) * size: page * size]
        return {"paging": self._paging(path, len(paths), page), "items": chunk}

    def render_detail(self, etype: str, permalink: str) -> Optional[dict]:
        fx = self.corpus.get(etype, permalink)
        if fx is None:
            return None
        api_path = f"{etype}/{permalink}"
        props = {
            "permalink": permalink,
            "api_path": api_path,
            "web_path": f"{_WEB_SEGMENT[etype]}/{permalink}",
        }
        props.update(fx.get("properties") or {})
        relationships = {}
        for relation in fx.get("relationships") or {}:
            rel_path = f"{api_path}/{relation}"
            block = self._page_of(rel_path, self.corpus.relation_paths(fx, relation), 1)
            block["items"] = [self._stub(p) for p in block["items"]]
            relationships[relation] = {"cardinality": "OneToMany", **block}
        data = {
            "uuid": fx.get("uuid") or _uuid_for(api_path),
            "type": ENTITY_TYPES[etype],
            "properties": props,
            "relationships": relationships,
        }
        return {"metadata": self._metadata(), "data": data}

    def render_index(self, etype: str, page: int) -> dict:
        paths = [f"{etype}/{p}" for p in sorted(self.corpus.entities.get(etype, {}))]
        block = self._page_of(etype, paths, page)
        block["items"] = [self._stub(p, with_name=True) for p in block["items"]]
        return {"metadata": self._metadata(), "data": block}

    def render_relation(self, etype: str, permalink: str, relation: str, page: int) -> Optional[dict]:
        fx = self.corpus.get(etype, permalink)
        if fx is None or relation not in (fx.get("relationships") or {}):
            return None
        rel_path = f"{etype}/{permalink}/{relation}"
        block = self._page_of(rel_path, self.corpus.relation_paths(fx, relation), page)
        block["items"] = [self._stub(p) for p in block["items"]]
        return {"metadata": self._metadata(), "data": block}

    # -- dispatch ------------------------------------------------------------

    def handle(self, method: str, target: str):
        """Answer one request; returns ``(status, body_dict)``."""
        started = time.monotonic()
        parts = urlsplit(target)
        query = dict(parse_qsl(parts.query, keep_blank_values=True))
        key = query.pop("user_key", "")
        segments = [s for s in parts.path.split("/") if s]
        status, body = self._dispatch(method, segments, query, key)
        with self._log_lock:
            self._log.append(RequestRecord(started, method, "/".join(segments), query, status))
        return status, body

    def _dispatch(self, method, segments, query, key):
        if method != "GET":
            return 405, _error(405, "method not allowed")
        if not key or (self.corpus.valid_keys and key not in self.corpus.valid_keys):
            return 401, _error(401, "invalid user_key")
        if self.corpus.enforce_rate:
            with self._log_lock:
                now = time.monotonic()
                if now - self._last_served < self.corpus.rate_interval:
                    return 429, _error(429, "rate limit exceeded")
                self._last_served = now
        try:
            page = int(query.get("page", "1"))
        except ValueError:
            return 400, _error(400, "bad page parameter")
        if page < 1:
            return 400, _error(400, "bad page parameter")
        if not segments or segments[0] not in ENTITY_TYPES or len(segments) > 3:
            return 404, _error(404, "not found")
        if len(segments) == 1:
            body = self.render_index(segments[0], page)
        elif len(segments) == 2:
            body = self.render_detail(*segments)
        else:
            body = self.render_relation(*segments, page)
        if body is None:
            return 404, _error(404, "not found")
        return 200, body

    # -- server ----------------------------------------------------------------

    def serve(self, addr: str = "127.0.0.1:0") -> "MockUpstream":
        host, _, port = addr.rpartition(":")
        mock = self

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"
            disable_nagle_algorithm = True

            def _answer(self):
                status, body = mock.handle(self.command, self.path)
                payload = json.dumps(body, ensure_ascii=False).encode("utf-8")
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                if self.command != "HEAD":
                    self.wfile.write(payload)

            do_GET = do_POST = do_PUT = do_DELETE = do_PATCH = do_HEAD = _answer

            def log_message(self, fmt, *args):
                log.debug("mock-upstream: %s", redact_query_keys(fmt % args))

        self._server = ThreadingHTTPServer((host or "127.0.0.1", int(port or 0)), Handler)
        self._server.daemon_threads = True
        bound_host, bound_port = self._server.server_address[:2]
        self.url = f"http://{bound_host}:{bound_port}"
        self._thread = threading.Thread(target=self._server.serve_forever, args=(0.05,), name="mock-upstream", daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
            self._server = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.stop()


def _error(status: int, message: str) -> dict:
    return {"error": {"code": status, "message": message}}


def serve(corpus: FixtureCorpus, addr: str = "127.0.0.1:0") -> MockUpstream:
    return MockUpstream(corpus).serve(addr)


def main(argv=None):
    parser = argparse.ArgumentParser(prog="mock-upstream", description="Serve fixture JSON as a paged upstream API.")
    parser.add_argument("--fixtures", required=True)
    parser.add_argument("--addr", default="127.0.0.1:8088")
    parser.add_argument("--page-size", type=int, default=8)
    parser.add_argument("--keys", default="", help="comma-separated accepted keys (default: any non-empty key)")
    parser.add_argument("--enforce-rate", action="store_true")
    parser.add_argument("--rate-ms", type=int, default=1000)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO)

    corpus = FixtureCorpus.from_directory(
        args.fixtures,
        page_size=args.page_size,
        valid_keys=frozenset(k for k in args.keys.split(",") if k),
        enforce_rate=args.enforce_rate,
        rate_interval=args.rate_ms / 1000.0,
    )
    server = serve(corpus, args.addr)
    log.info("mock upstream listening on %s", server.url)
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        server.stop()


if __name__ == "__main__":
    main()
