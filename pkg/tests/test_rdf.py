import gzip

import pytest
from hypothesis import given, strategies as st

from linkedcb.errors import (
    InvalidIriError,
    InvalidLiteralError,
    InvalidPermalinkError,
    InvalidTypeError,
    NTriplesSyntaxError,
)
from linkedcb.namespaces import CBW, RDF_TYPE
from linkedcb.rdf import (
    XSD_BOOLEAN,
    XSD_DATE,
    XSD_GYEAR,
    Iri,
    Literal,
    Triple,
    TripleSet,
    escape_literal,
    mint_entity_iri,
    parse_ntriples,
    read_ntriples_file,
    serialize_ntriples,
    unescape_literal,
    write_ntriples_file,
)

from oracles import nt_graph

BASE = "http://linked-crunchbase.org"
FB_LINE = (
    "<http://linked-crunchbase.org/api/organizations/facebook> "
    "<http://www.w3.org/1999/02/22-rdf-syntax-ns#type> "
    "<http://ontologycentral.com/2010/05/cb/vocab#Organization> ."
)


def test_mint_entity_iri():
    assert mint_entity_iri(BASE, "organizations", "facebook") == Iri(BASE + "/api/organizations/facebook")
    assert mint_entity_iri(BASE + "/", "people", "x") == mint_entity_iri(BASE, "people", "x")


@pytest.mark.parametrize("etype, permalink, exc", [
    ("companies", "facebook", InvalidTypeError),
    ("organizations", "Bad Name!", InvalidPermalinkError),
    ("organizations", "", InvalidPermalinkError),
])
def test_mint_entity_iri_errors(etype, permalink, exc):
    with pytest.raises(exc):
        mint_entity_iri(BASE, etype, permalink)


@given(st.sampled_from(["organizations", "people", "ipos"]), st.from_regex(r"[a-z0-9._-]{1,12}", fullmatch=True),
       st.sampled_from(["organizations", "people", "ipos"]), st.from_regex(r"[a-z0-9._-]{1,12}", fullmatch=True))
def test_mint_is_injective(t1, p1, t2, p2):
    same = mint_entity_iri(BASE, t1, p1) == mint_entity_iri(BASE, t2, p2)
    assert same == ((t1, p1) == (t2, p2))


@pytest.mark.parametrize("bad", ["", "no-scheme", "http://a b", "http://x/<y>", "http://x/\n", "1http://x"])
def test_iri_rejects(bad):
    with pytest.raises(InvalidIriError):
        Iri(bad)


def test_literal_rules():
    with pytest.raises(InvalidLiteralError):
        Literal("x", Iri(XSD_DATE), "en")
    with pytest.raises(InvalidLiteralError):
        Literal("2004-02-30", Iri(XSD_DATE))
    with pytest.raises(InvalidLiteralError):
        Literal("yes", Iri(XSD_BOOLEAN))
    assert Literal("2004", Iri(XSD_GYEAR)).n3() == '"2004"^^<http://www.w3.org/2001/XMLSchema#gYear>'
    assert Literal("x", Iri("http://www.w3.org/2001/XMLSchema#string")) == Literal("x")


def test_no_blank_node_term():
    with pytest.raises(TypeError):
        Triple("_:b0", Iri(RDF_TYPE), Iri(CBW + "Organization"))


def test_serialize_examples():
    assert serialize_ntriples(TripleSet()) == ""
    g = TripleSet([Triple(mint_entity_iri(BASE, "organizations", "facebook"), Iri(RDF_TYPE), Iri(CBW + "Organization"))])
    text = serialize_ntriples(g)
    assert text == FB_LINE + "\n"
    # independent grammar check
    assert len(nt_graph(text)) == 1
    assert serialize_ntriples(g) == text


@pytest.mark.parametrize("raw, escaped", [
    ('say "hi"', 'say \\"hi\\"'),
    ("line1\nline2", "line1\\nline2"),
    ("Müller", "Müller"),
    ("a\\b", "a\\\\b"),
    ("tab\there\r", "tab\\there\\r"),
])
def test_escape_literal(raw, escaped):
    assert escape_literal(raw) == escaped
    assert unescape_literal(escaped) == raw


@given(st.text())
def test_escape_round_trip(s):
    assert unescape_literal(escape_literal(s)) == s


def test_unescape_uchar():
    assert unescape_literal("M\\u00FCller \\U0001F600") == "Müller \U0001F600"


_iris = st.builds(lambda s: Iri("http://ex.org/" + s), st.from_regex(r"[a-zA-Z0-9_~.\-/#]{0,10}", fullmatch=True))
_literals = st.one_of(
    st.builds(Literal, st.text()),
    st.builds(lambda s, l: Literal(s, language=l), st.text(), st.sampled_from(["en", "de", "en-gb"])),
    st.builds(lambda n: Literal(str(n), Iri("http://www.w3.org/2001/XMLSchema#integer")), st.integers()),
    st.builds(lambda b: Literal("true" if b else "false", Iri(XSD_BOOLEAN)), st.booleans()),
)
_triples = st.builds(Triple, _iris, _iris, st.one_of(_iris, _literals))


@given(st.lists(_triples, max_size=20))
def test_round_trip_own_parser(ts):
    g = TripleSet(ts)
    assert parse_ntriples(serialize_ntriples(g)) == g


@given(st.lists(_triples, max_size=20))
def test_round_trip_independent_parser(ts):
    g = TripleSet(ts)
    text = serialize_ntriples(g)
    assert len(nt_graph(text)) == len(g)
    assert not any(line.startswith("_:") for line in text.split("\n")[:-1])


@given(st.lists(_triples, max_size=10), st.lists(_triples, max_size=10))
def test_serialize_is_set_homomorphism(a, b):
    ga, gb = TripleSet(a), TripleSet(b)
    union_lines = set(serialize_ntriples(ga | gb).split("\n")[:-1])
    assert union_lines == set(serialize_ntriples(ga).split("\n")[:-1]) | set(serialize_ntriples(gb).split("\n")[:-1])


@given(st.lists(_triples, max_size=15))
def test_output_sorted_and_unique(ts):
    lines = serialize_ntriples(TripleSet(ts + ts)).split("\n")[:-1] or []
    assert lines == sorted(set(lines))
    keys = [(t.subject.n3(), t.predicate.n3(), t.object.n3()) for t in parse_ntriples("\n".join(lines))]
    assert sorted(keys) == sorted(keys, key=lambda k: f"{k[0]} {k[1]} {k[2]} .")


def test_duplicate_insert_keeps_cardinality():
    t = Triple(Iri("http://a/x"), Iri("http://a/p"), Literal("v"))
    g = TripleSet([t])
    g.add(t)
    assert len(g) == 1


def test_parser_rejects_blank_nodes_and_garbage():
    with pytest.raises(NTriplesSyntaxError):
        parse_ntriples("_:b <http://a/p> <http://a/o> .\n")
    with pytest.raises(NTriplesSyntaxError):
        parse_ntriples("<http://a/s> <http://a/p> .\n")
    lenient = parse_ntriples("_:b <http://a/p> <http://a/o> .\n# comment\n<http://a/s> <http://a/p> \"v\"@en .\n", strict=False)
    assert len(lenient) == 1


def test_gzip_file_is_deterministic(tmp_path):
    g = TripleSet([Triple(Iri("http://a/s"), Iri("http://a/p"), Literal("Müller"))])
    a, b = tmp_path / "a.nt.gz", tmp_path / "b.nt.gz"
    write_ntriples_file(a, g)
    write_ntriples_file(b, g)
    assert a.read_bytes() == b.read_bytes()
    assert gzip.decompress(a.read_bytes()).decode("utf-8") == serialize_ntriples(g)
    assert read_ntriples_file(a) == g
