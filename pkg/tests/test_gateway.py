import base64
import logging
import re

import pytest
import requests

from linkedcb.errors import MalformedCredentialsError, NotAcceptableError, UnsupportedSchemeError
from linkedcb.gateway import JSON, JSONLD, TURTLE, Gateway, GatewayServer, decode_auth_header, negotiate
from linkedcb.linker import SameAsStore
from linkedcb.namespaces import CBW, OWL_SAMEAS, RDF_TYPE
from linkedcb.rdf import Iri

from conftest import KEY
from oracles import jsonld_graph, nt_graph

BASE = "http://linked-crunchbase.org"
AUTH = "Basic " + base64.b64encode(f"{KEY}:".encode()).decode()
EXTERNAL = Iri("http://dbpedia.org/resource/Org_1")


@pytest.fixture
def setup(serve, make_client, ents):
    mock = serve(ents, page_size=3)
    store = SameAsStore([(Iri(f"{BASE}/api/organizations/org-1"), EXTERNAL)])
    return mock, Gateway(make_client(mock), store)


# -- negotiate ---------------------------------------------------------------------

@pytest.mark.parametrize(
    "accept, expected",
    [
        (None, TURTLE),
        ("", TURTLE),
        ("*/*", TURTLE),
        ("text/turtle", TURTLE),
        ("application/ld+json", JSONLD),
        ("application/json", JSON),
        ("application/*", JSONLD),
        ("text/*", TURTLE),
        ("application/json;q=0.9, text/turtle;q=0.5", JSON),
        ("text/turtle;q=0, */*", JSONLD),
        ("text/turtle;q=0, application/ld+json;q=0, */*;q=0.1", JSON),
        ("text/html, application/json;q=0.1", JSON),
        ("APPLICATION/LD+JSON; charset=utf-8", JSONLD),
        ("application/json, application/ld+json", JSONLD),
    ],
)
def test_negotiate(accept, expected):
    assert negotiate(accept) == expected


@pytest.mark.parametrize("accept", ["text/html", "image/*", "text/turtle;q=0", "text/html, */*;q=0"])
def test_not_acceptable(accept):
    with pytest.raises(NotAcceptableError):
        negotiate(accept)


# -- auth ----------------------------------------------------------------------------

def test_decode_auth_example():
    # independent check of the documented header value
    assert base64.b64encode(b"key123:") == b"a2V5MTIzOg=="
    assert decode_auth_header("Basic a2V5MTIzOg==").secret == "key123"
    assert decode_auth_header("basic a2V5MTIzOg==").secret == "key123"
    assert decode_auth_header(None) is None


def test_decode_auth_errors():
    with pytest.raises(UnsupportedSchemeError) as info:
        decode_auth_header("Bearer xyz")
    assert info.value.status == 401
    for bad in ("Basic !!!", "Basic " + base64.b64encode(b"key:pw").decode(), "Basic " + base64.b64encode(b"nocolon").decode()):
        with pytest.raises(MalformedCredentialsError) as info:
            decode_auth_header(bad)
        assert info.value.status == 400


# -- routing -------------------------------------------------------------------------

def test_index_and_ontology(setup):
    mock, gw = setup
    r = gw.route("GET", "/")
    assert r.status == 200 and r.content_type.startswith("text/plain")
    assert "/api/{entity-type}" in r.text
    r = gw.route("GET", "/ontology.owl")
    assert r.status == 200 and r.content_type == TURTLE
    assert f"<{CBW}Person> <http://www.w3.org/2002/07/owl#equivalentClass> <http://schema.org/Person> ." in r.text
    assert jsonld_graph(gw.route("GET", "/ontology.owl", JSONLD).text) == nt_graph(r.text)
    assert mock.request_log == []


def test_turtle_entity(setup):
    _, gw = setup
    r = gw.route("GET", "/api/organizations/org-1", "text/turtle", AUTH)
    assert r.status == 200 and r.content_type == TURTLE
    assert f"<{BASE}/api/organizations/org-1> <{RDF_TYPE}> <{CBW}Organization> .\n" in r.text
    assert f"<{OWL_SAMEAS}> <{EXTERNAL.value}> ." in r.text


def test_json_is_byte_identical(setup):
    mock, gw = setup
    r = gw.route("GET", "/api/organizations/org-1", "application/json", AUTH)
    upstream = requests.get(f"{mock.url}/organizations/org-1", params={"user_key": KEY}, timeout=5)
    assert r.status == 200 and r.content_type == JSON
    assert r.body == upstream.content


@pytest.mark.parametrize(
    "method, path, accept, auth, status",
    [
        ("POST", "/api/organizations", None, AUTH, 405),
        ("DELETE", "/api/organizations/org-1", None, AUTH, 405),
        ("GET", "/nowhere", None, AUTH, 404),
        ("GET", "/api/startups", None, AUTH, 404),
        ("GET", "/api/organizations/Bad%20Name", None, AUTH, 404),
        ("GET", "/api/organizations/org-1/Founders", None, AUTH, 404),
        ("GET", "/api/organizations/org-1/founders/x", None, AUTH, 404),
        ("GET", "/api/organizations/missing", None, AUTH, 404),
        ("GET", "/api/organizations/org-1", "text/html", AUTH, 406),
        ("GET", "/api/organizations?page=0", None, AUTH, 400),
        ("GET", "/api/organizations/org-1", None, "Basic " + base64.b64encode(b"wrong:").decode(), 401),
        ("GET", "/api/organizations/org-1", None, "Bearer abc", 401),
        ("GET", "/api/organizations/org-1", None, "Basic %%%", 400),
    ],
)
def test_error_statuses(setup, method, path, accept, auth, status):
    _, gw = setup
    r = gw.route(method, path, accept, auth)
    assert r.status == status
    if status == 401:
        assert r.headers["WWW-Authenticate"].startswith("Basic ")


def test_relation_and_index_routes(setup, ents):
    _, gw = setup
    r = gw.route("GET", "/api/organizations/org-0/funding_rounds?page=2", TURTLE, AUTH)
    assert r.status == 200
    objects = {line.split(" ")[2] for line in r.text.splitlines() if f"{CBW}funding_rounds" in line}
    expected = ents["organizations"]["org-0"]["relationships"]["funding_rounds"][3:6]
    assert objects == {f"<{BASE}/api/{p}>" for p in expected}
    assert f"<{BASE}/api/organizations/org-0/funding_rounds?page=3>" in r.text

    r = gw.route("GET", "/api/people", TURTLE, AUTH)
    typed = [line for line in r.text.splitlines() if f"<{RDF_TYPE}>" in line]
    assert len(typed) == 3
    assert f"<{BASE}/api/people?page=2>" in r.text


# -- keyless -------------------------------------------------------------------------

@pytest.mark.parametrize("accept", [TURTLE, JSONLD, JSON, None])
def test_keyless_returns_only_sameas(setup, accept):
    mock, gw = setup
    r = gw.route("GET", "/api/organizations/org-1", accept)
    assert r.status == 200
    triples = nt_graph(r.text) if r.content_type == TURTLE else jsonld_graph(r.text)
    assert {(str(s), str(p), str(o)) for s, p, o in triples} == {
        (f"{BASE}/api/organizations/org-1", OWL_SAMEAS, EXTERNAL.value)
    }
    assert mock.request_log == []


def test_keyless_without_mapping_is_empty_200(setup):
    mock, gw = setup
    for path in ("/api/organizations/org-2", "/api/organizations", "/api/organizations/org-2/founders"):
        r = gw.route("GET", path)
        assert r.status == 200 and r.text == ""
    assert CBW not in gw.route("GET", "/api/organizations/org-1").text
    assert len(gw.keyless_response(Iri(f"{BASE}/api/people/person-0"))) == 0
    assert mock.request_log == []


# -- invariants ----------------------------------------------------------------------

def _all_entity_paths(ents):
    return [f"/api/{t}/{p}" for t, fx in ents.items() for p in fx]


def test_format_agreement(setup, ents):
    _, gw = setup
    for path in _all_entity_paths(ents):
        nt = gw.route("GET", path, TURTLE, AUTH)
        ld = gw.route("GET", path, JSONLD, AUTH)
        assert nt.status == ld.status == 200
        assert ld.content_type == JSONLD
        assert nt_graph(nt.text) == jsonld_graph(ld.text), path
    for path in ("/api/organizations", "/api/organizations/org-0/funding_rounds?page=2"):
        assert nt_graph(gw.route("GET", path, TURTLE, AUTH).text) == jsonld_graph(gw.route("GET", path, JSONLD, AUTH).text)


def test_link_integrity(setup, ents):
    _, gw = setup
    emitted = set()
    todo = _all_entity_paths(ents) + [f"/api/{t}" for t in ents]
    for path in todo:
        body = gw.route("GET", path, TURTLE, AUTH).text
        emitted |= set(re.findall(r"<([^>]*)>", body))
    local = {iri for iri in emitted if iri.startswith(BASE)}
    assert len(local) > len(todo)
    for iri in sorted(local):
        r = gw.route("GET", iri[len(BASE):], TURTLE, AUTH)
        assert r.status == 200, iri
    # everything else is vocabulary or an external sameAs target
    for iri in emitted - local:
        assert iri.startswith((CBW, "http://www.w3.org/", EXTERNAL.value)), iri


def test_no_key_leak(setup, ents, caplog):
    _, gw = setup
    captured = []
    with caplog.at_level(logging.DEBUG):
        for accept in (TURTLE, JSONLD, JSON):
            for path in _all_entity_paths(ents)[:4] + ["/api/organizations", "/api/organizations/missing", "/x"]:
                r = gw.route("GET", path, accept, AUTH)
                captured.append(r.body.decode())
                captured.extend(f"{k}: {v}" for k, v in r.headers.items())
    traffic = "\n".join(captured)
    assert KEY not in traffic
    assert base64.b64encode(f"{KEY}:".encode()).decode() not in traffic
    assert KEY not in caplog.text


def test_http_server_end_to_end(setup):
    _, gw = setup
    with GatewayServer(gw) as server:
        r = requests.get(f"{server.url}/api/organizations/org-1", auth=(KEY, ""), headers={"Accept": "application/ld+json"}, timeout=5)
        assert r.status_code == 200
        assert r.headers["Content-Type"] == JSONLD
        anon = requests.get(f"{server.url}/api/organizations/org-1", timeout=5)
        assert anon.status_code == 200 and anon.headers["Content-Type"] == TURTLE
        assert anon.text.strip().endswith(f"<{EXTERNAL.value}> .")
        assert requests.post(f"{server.url}/api/organizations", timeout=5).status_code == 405
