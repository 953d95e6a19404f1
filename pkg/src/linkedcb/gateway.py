"""Linked Data front end for the upstream JSON API.

URI templates::

    /                                   index page
    /ontology.owl                       the cbw vocabulary
    /api/{type}                         paged instance list
    /api/{type}/{permalink}             one entity
    /api/{type}/{permalink}/{relation}  one relation of an entity

The upstream key arrives as HTTP Basic credentials (key in the user field,
empty password) and leaves as a URI parameter.  Without a key only the
license-free owl:sameAs links are returned.
"""

from __future__ import annotations

import argparse
import base64
import binascii
import logging
import os
import threading
import time
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional
from urllib.parse import parse_qsl, urlencode, urlsplit

from .errors import (
    AuthError,
    ForeignRedirectError,
    InvalidKeyError,
    MalformedCredentialsError,
    NotAcceptableError,
    RateExceededError,
    UnknownEntityError,
    UnsupportedSchemeError,
    UpstreamError,
    WrongPayloadError,
)
from .namespaces import DEFAULT_BASE_IRI, ENTITY_TYPES
from .rdf import PERMALINK_RE, Iri, Triple, TripleSet, mint_entity_iri, serialize_ntriples
from .transform import (
    SummaryPage,
    entity_to_triples,
    graph_to_jsonld,
    relation_items_to_triples,
    strip_metadata,
    summary_to_triples,
    to_jsonld,
)
from .upstream import ApiKey, UpstreamClient, shared_gate
from .vocab import SNAKE_CASE_RE, emit_ontology, property_iri

log = logging.getLogger(__name__)

TURTLE = "text/turtle"
JSONLD = "application/ld+json"
JSON = "application/json"
# preference order for ties
SUPPORTED_FORMATS = (TURTLE, JSONLD, JSON)

REALM = "linked-crunchbase"

INDEX_TEXT = """Crunchbase Linked Data API

GET /ontology.owl                          vocabulary (OWL)
GET /api/{entity-type}                     all instances of an entity type
GET /api/{entity-type}/{permalink}         one entity
GET /api/{entity-type}/{permalink}/{relation}
                                           one relation of an entity

Representations: text/turtle (N-Triples), application/ld+json, application/json.
Pass your upstream API key as HTTP Basic user name with an empty password.
Without a key, only owl:sameAs links are returned.
"""


@dataclass
class Response:
    status: int
    body: bytes = b""
    headers: dict = field(default_factory=dict)

    @property
    def content_type(self) -> Optional[str]:
        return self.headers.get("Content-Type")

    @property
    def text(self) -> str:
        return self.body.decode("utf-8")


def _parse_accept(header: str):
    for part in header.split(","):
        pieces = [p.strip() for p in part.split(";")]
        media = pieces[0].lower()
        if not media:
            continue
        q = 1.0
        for param in pieces[1:]:
            name, _, value = param.partition("=")
            if name.strip().lower() == "q":
                try:
                    q = float(value)
                except ValueError:
                    q = 0.0
        yield media, max(0.0, min(1.0, q))


def negotiate(accept_header: Optional[str]) -> str:
    """Pick one of :data:`SUPPORTED_FORMATS` for an Accept header."""
    if accept_header is None or not accept_header.strip():
        return TURTLE
    ranges = list(_parse_accept(accept_header))
    best, best_q = None, 0.0
    for fmt in SUPPORTED_FORMATS:
        major = fmt.split("/")[0]
        # the most specific matching range decides
        q, specificity = None, -1
        for media, mq in ranges:
            if media == fmt:
                spec = 2
            elif media == f"{major}/*":
                spec = 1
            elif media == "*/*":
                spec = 0
            else:
                continue
            if spec > specificity:
                q, specificity = mq, spec
        if q is not None and q > best_q:
            best, best_q = fmt, q
    if best is None:
        raise NotAcceptableError(f"none of {', '.join(SUPPORTED_FORMATS)} acceptable")
    return best


def decode_auth_header(h: Optional[str]) -> Optional[ApiKey]:
    if h is None or not h.strip():
        return None
    scheme, _, credentials = h.strip().partition(" ")
    if scheme.lower() != "basic":
        raise UnsupportedSchemeError(f"unsupported authorization scheme {scheme!r}")
    try:
        decoded = base64.b64decode(credentials.strip(), validate=True).decode("utf-8")
    except (binascii.Error, ValueError):
        raise MalformedCredentialsError("credentials are not valid base64") from None
    user, sep, password = decoded.partition(":")
    if not sep or not user:
        raise MalformedCredentialsError("expected '<key>:' credentials")
    if password:
        raise MalformedCredentialsError("password field must be empty")
    return ApiKey(user)


def _text(status: int, message: str, **headers) -> Response:
    return Response(status, (message.rstrip("\n") + "\n").encode("utf-8"), {"Content-Type": "text/plain; charset=utf-8", **headers})


class Gateway:
    def __init__(self, client: UpstreamClient, sameas=None, base_iri: str = DEFAULT_BASE_IRI):
        self.client = client
        self.sameas = sameas
        self.base_iri = base_iri.rstrip("/")

    # -- representations -------------------------------------------------

    def _render(self, fmt: str, triples: TripleSet, jsonld: Optional[str] = None) -> Response:
        if fmt == TURTLE:
            body = serialize_ntriples(triples)
        else:
            body = jsonld if jsonld is not None else graph_to_jsonld(triples)
        return Response(200, body.encode("utf-8"), {"Content-Type": fmt, "Vary": "Accept"})

    def keyless_response(self, entity_iri: Iri) -> TripleSet:
        if self.sameas is None:
            return TripleSet()
        return self.sameas.triples_for(entity_iri)

    def _page_iri(self, path: str, page: Optional[int]) -> Iri:
        iri = f"{self.base_iri}/api/{path}"
        return Iri(f"{iri}?{urlencode({'page': page})}" if page and page > 1 else iri)

    def _next_link(self, page_iri: Iri, next_url: Optional[str]) -> TripleSet:
        if not next_url:
            return TripleSet()
        try:
            rel = self.client.relative(next_url)
        except ForeignRedirectError:
            log.warning("dropping off-host next page link")
            return TripleSet()
        return TripleSet([Triple(page_iri, property_iri("next_page_url"), Iri(f"{self.base_iri}/api/{rel}"))])

    # -- routing ---------------------------------------------------------------

    def route(self, method: str, path: str, accept: Optional[str] = None, auth_header: Optional[str] = None) -> Response:
        if method.upper() != "GET":
            return _text(405, "method not allowed; this API is read-only", Allow="GET")
        parts = urlsplit(path)
        segments = [s for s in parts.path.split("/") if s]
        query = dict(parse_qsl(parts.query, keep_blank_values=True))

        if not segments or segments == ["api"]:
            return _text(200, INDEX_TEXT)

        if segments == ["ontology.owl"]:
            kind = "ontology"
        elif segments[0] == "api" and 2 <= len(segments) <= 4:
            kind = ("index", "entity", "relation")[len(segments) - 2]
            segments = segments[1:]
            if segments[0] not in ENTITY_TYPES:
                return _text(404, f"unknown entity type {segments[0]!r}")
            if len(segments) > 1 and not PERMALINK_RE.match(segments[1]):
                return _text(404, "no such entity")
            if len(segments) > 2 and not SNAKE_CASE_RE.match(segments[2]):
                return _text(404, "no such relation")
        else:
            return _text(404, "not found")

        try:
            fmt = negotiate(accept)
        except NotAcceptableError as exc:
            return _text(406, f"{exc}")

        if kind == "ontology":
            return self._render(fmt, emit_ontology())

        page = None
        if "page" in query:
            try:
                page = int(query["page"])
                if page < 1:
                    raise ValueError
            except ValueError:
                return _text(400, "page must be a positive integer")

        try:
            key = decode_auth_header(auth_header)
        except AuthError as exc:
            headers = {"WWW-Authenticate": f'Basic realm="{REALM}"'} if exc.status == 401 else {}
            return _text(exc.status, str(exc), **headers)

        if key is None:
            if kind == "index":
                triples = TripleSet()
            else:
                triples = self.keyless_response(mint_entity_iri(self.base_iri, segments[0], segments[1]))
            return self._render(fmt, triples)

        upstream_path = "/".join(segments) + (f"?{urlencode({'page': page})}" if page else "")
        try:
            env = self.client.fetch(upstream_path, key)
            if fmt == JSON:
                return Response(200, env.raw, {"Content-Type": JSON, "Vary": "Accept"})
            if kind == "entity":
                detail = strip_metadata(env)
                if (detail.entity_type, detail.permalink) != (segments[0], segments[1]):
                    raise WrongPayloadError("upstream answered for another entity")
                triples = entity_to_triples(detail, self.sameas, self.base_iri)
                return self._render(fmt, triples, to_jsonld(detail, self.sameas, self.base_iri) if fmt == JSONLD else None)
            data = env.data
            if not isinstance(data, SummaryPage):
                raise WrongPayloadError("expected a paged list from upstream")
            page_iri = self._page_iri("/".join(segments), page)
            if kind == "index":
                triples = summary_to_triples(data, self.base_iri)
            else:
                owner = mint_entity_iri(self.base_iri, segments[0], segments[1])
                triples = relation_items_to_triples(owner, segments[2], data.items, self.base_iri)
            triples.update(self._next_link(page_iri, data.next_page_url))
            return self._render(fmt, triples)
        except InvalidKeyError:
            return _text(401, "the upstream API rejected the key", **{"WWW-Authenticate": f'Basic realm="{REALM}"'})
        except UnknownEntityError:
            return _text(404, "not found upstream")
        except RateExceededError:
            return _text(503, "upstream rate limit exceeded, retry later", **{"Retry-After": "1"})
        except (UpstreamError, WrongPayloadError) as exc:
            log.warning("upstream failure on %s: %s", "/".join(segments), key.redact(str(exc)))
            return _text(502, "bad upstream response")


class GatewayServer:
    """Threaded HTTP server around a :class:`Gateway`."""

    def __init__(self, gateway: Gateway, addr: str = "127.0.0.1:0"):
        host, _, port = addr.rpartition(":")
        gw = gateway

        class Handler(BaseHTTPRequestHandler):
            protocol_version = "HTTP/1.1"
            disable_nagle_algorithm = True

            def _answer(self):
                resp = gw.route(self.command, self.path, self.headers.get("Accept"), self.headers.get("Authorization"))
                self.send_response(resp.status)
                for name, value in resp.headers.items():
                    self.send_header(name, value)
                self.send_header("Content-Length", str(len(resp.body)))
                self.end_headers()
                self.wfile.write(resp.body)

            do_GET = do_POST = do_PUT = do_DELETE = do_PATCH = _answer

            def log_message(self, fmt, *args):
                # request lines only; headers (and thus credentials) are never logged
                log.debug("gateway: " + fmt, *args)

        self._server = ThreadingHTTPServer((host or "127.0.0.1", int(port or 0)), Handler)
        self._server.daemon_threads = True
        bound_host, bound_port = self._server.server_address[:2]
        self.url = f"http://{bound_host}:{bound_port}"
        self._thread = threading.Thread(target=self._server.serve_forever, args=(0.05,), name="gateway", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.stop()


def main(argv=None):
    from .linker import SameAsStore

    parser = argparse.ArgumentParser(prog="gateway", description="Serve the upstream API as Linked Data.")
    parser.add_argument("--listen", default=os.environ.get("LISTEN_ADDR", "127.0.0.1:8080"))
    parser.add_argument("--upstream", default=os.environ.get("UPSTREAM_BASE"))
    parser.add_argument("--sameas", default=os.environ.get("SAMEAS_PATH"))
    parser.add_argument("--base-iri", default=os.environ.get("BASE_IRI", DEFAULT_BASE_IRI))
    parser.add_argument("--rate-ms", type=int, default=1000)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO)

    client = UpstreamClient(args.upstream, gate=shared_gate(args.rate_ms / 1000.0))
    store = SameAsStore.from_file(args.sameas) if args.sameas else SameAsStore()
    server = GatewayServer(Gateway(client, store, args.base_iri), args.listen)
    log.info("gateway on %s -> %s (%d sameAs links)", server.url, client.base_url, len(store))
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        server.stop()


if __name__ == "__main__":
    main()
