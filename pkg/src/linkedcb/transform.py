"""Upstream JSON payloads to RDF triples and JSON-LD.

Upstream wraps every payload in an envelope::

    {"metadata": {...}, "data": <entity detail> | <summary page>}

An entity detail carries ``properties`` (scalars) and ``relationships``
(paged lists of item stubs).  Relationship lists are flattened into direct
object triples, so no intermediate list node is ever produced.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import re
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Optional, Union

from .errors import InvalidDateError, InvalidTrustError, WrongPayloadError
from .namespaces import CBW, DEFAULT_BASE_IRI, OWL, OWL_SAMEAS, RDF_TYPE, XSD
from .rdf import (
    XSD_BOOLEAN,
    XSD_DATE,
    XSD_DECIMAL,
    XSD_GYEAR,
    XSD_GYEARMONTH,
    XSD_INTEGER,
    Iri,
    Literal,
    Triple,
    TripleSet,
    mint_entity_iri,
)
from .vocab import class_iri, property_iri

log = logging.getLogger(__name__)

TRUST_SUFFIX = "_trust_code"
BOOKKEEPING_FIELDS = ("permalink", "api_path", "web_path")

_DATE_PREFIX_RE = re.compile(r"(\d{4})(?:-(\d{2})(?:-(\d{2}))?)?\Z")


@dataclass(frozen=True)
class TrustCodedDate:
    lexical: str
    trust_code: int

    def __post_init__(self):
        if isinstance(self.trust_code, bool) or not isinstance(self.trust_code, int) or not 0 <= self.trust_code <= 7:
            raise InvalidTrustError(f"trust code must be an integer in 0..7, got {self.trust_code!r}")


Scalar = Union[str, int, Decimal, bool, None, TrustCodedDate]


@dataclass(frozen=True)
class ItemStub:
    entity_type: str
    permalink: str
    api_path: str

    def __post_init__(self):
        if self.api_path != f"{self.entity_type}/{self.permalink}":
            raise WrongPayloadError(f"api_path {self.api_path!r} does not match {self.entity_type}/{self.permalink}")

    @classmethod
    def from_api_path(cls, api_path: str) -> "ItemStub":
        parts = api_path.strip("/").split("/")
        if len(parts) != 2 or not all(parts):
            raise WrongPayloadError(f"malformed api_path: {api_path!r}")
        return cls(parts[0], parts[1], "/".join(parts))

    def iri(self, base=DEFAULT_BASE_IRI) -> Iri:
        return mint_entity_iri(base, self.entity_type, self.permalink)


@dataclass
class RelationshipPage:
    total_items: int
    first_page_items: list
    next_page_url: Optional[str] = None


@dataclass
class EntityDetail:
    entity_type: str
    permalink: str
    uuid: Optional[str] = None
    properties: dict = field(default_factory=dict)
    relationships: dict = field(default_factory=dict)
    bookkeeping: dict = field(default_factory=dict)

    def iri(self, base=DEFAULT_BASE_IRI) -> Iri:
        return mint_entity_iri(base, self.entity_type, self.permalink)


@dataclass
class SummaryPage:
    items: list
    total_items: int
    next_page_url: Optional[str] = None
    current_page: int = 1
    items_per_page: Optional[int] = None


@dataclass
class UpstreamEnvelope:
    metadata: dict
    data: Union[EntityDetail, SummaryPage, None]
    raw: bytes = b""


# -- parsing ---------------------------------------------------------------

def _item_stub(item) -> ItemStub:
    if not isinstance(item, dict):
        raise WrongPayloadError("relationship item must be an object")
    props = item.get("properties") or {}
    api_path = props.get("api_path") or item.get("api_path")
    if not api_path:
        raise WrongPayloadError("relationship item without api_path")
    return ItemStub.from_api_path(api_path)


def _paging(raw: dict) -> dict:
    paging = raw.get("paging") or {}
    if not isinstance(paging, dict):
        raise WrongPayloadError("paging block must be an object")
    return paging


def _relationship(name: str, raw) -> RelationshipPage:
    if not isinstance(raw, dict):
        raise WrongPayloadError(f"relationship {name!r} must be an object")
    if "item" in raw:  # one-to-one relationships carry a single item
        items = [raw["item"]] if raw["item"] else []
    else:
        items = raw.get("items") or []
    stubs = [_item_stub(i) for i in items]
    paging = _paging(raw)
    total = paging.get("total_items", len(stubs))
    if not isinstance(total, int) or total < len(stubs):
        raise WrongPayloadError(f"relationship {name!r}: bad total_items {total!r}")
    return RelationshipPage(total, stubs, paging.get("next_page_url"))


def _scalar(name, value):
    if value is None or isinstance(value, (str, bool, int, Decimal)):
        return value
    if isinstance(value, float):
        return Decimal(repr(value))
    raise WrongPayloadError(f"property {name!r} is not a scalar")


def _detail(data: dict) -> EntityDetail:
    props = dict(data.get("properties") or {})
    api_path = props.get("api_path")
    if not api_path:
        raise WrongPayloadError("entity detail without properties.api_path")
    stub = ItemStub.from_api_path(api_path)
    if props.get("permalink", stub.permalink) != stub.permalink:
        raise WrongPayloadError("permalink disagrees with api_path")
    bookkeeping = {k: props.pop(k) for k in BOOKKEEPING_FIELDS if k in props}

    properties = {}
    for name, value in props.items():
        if name.endswith(TRUST_SUFFIX) and name[: -len(TRUST_SUFFIX)] in props:
            continue
        value = _scalar(name, value)
        code = props.get(name + TRUST_SUFFIX)
        if code is not None and isinstance(value, str) and value:
            value = TrustCodedDate(value, code)
        properties[name] = value

    relationships = {
        name: _relationship(name, raw) for name, raw in (data.get("relationships") or {}).items()
    }
    return EntityDetail(stub.entity_type, stub.permalink, data.get("uuid"), properties, relationships, bookkeeping)


def _summary(data: dict) -> SummaryPage:
    items = [_item_stub(i) for i in data.get("items") or []]
    paging = _paging(data)
    return SummaryPage(
        items=items,
        total_items=paging.get("total_items", len(items)),
        next_page_url=paging.get("next_page_url"),
        current_page=paging.get("current_page", 1),
        items_per_page=paging.get("items_per_page"),
    )


def parse_envelope(body) -> UpstreamEnvelope:
    """Parse an upstream response body (bytes, str or already-decoded dict)."""
    raw = b""
    if isinstance(body, (bytes, bytearray)):
        raw = bytes(body)
        body = raw.decode("utf-8")
    if isinstance(body, str):
        if not raw:
            raw = body.encode("utf-8")
        try:
            body = json.loads(body, parse_float=Decimal)
        except ValueError as exc:
            raise WrongPayloadError(f"body is not JSON: {exc}") from None
    if not isinstance(body, dict):
        raise WrongPayloadError("envelope must be a JSON object")
    data = body.get("data")
    metadata = body.get("metadata") or {}
    if data is None:
        return UpstreamEnvelope(metadata, None, raw)
    if not isinstance(data, dict):
        raise WrongPayloadError("data block must be an object")
    if "items" in data and "properties" not in data:
        return UpstreamEnvelope(metadata, _summary(data), raw)
    return UpstreamEnvelope(metadata, _detail(data), raw)


def strip_metadata(env: UpstreamEnvelope) -> EntityDetail:
    if not isinstance(env.data, EntityDetail):
        raise WrongPayloadError("envelope does not carry an entity detail")
    return dataclasses.replace(env.data, properties=dict(env.data.properties), bookkeeping={})


# -- literals --------------------------------------------------------------

def trust_date_to_literal(d: TrustCodedDate) -> Literal:
    """Map a trust-coded date onto the XSD type matching its precision.

    ======  ==================  ==========
    code    datatype            lexical
    ======  ==================  ==========
    7       xsd:date            YYYY-MM-DD
    5, 6    xsd:gYearMonth      YYYY-MM
    1..4    xsd:gYear           YYYY
    0       (plain string)      as given
    ======  ==================  ==========
    """
    code = d.trust_code
    if isinstance(code, bool) or not isinstance(code, int) or not 0 <= code <= 7:
        raise InvalidTrustError(f"trust code must be in 0..7, got {code!r}")
    m = _DATE_PREFIX_RE.match(d.lexical)
    if not m:
        raise InvalidDateError(f"not a date: {d.lexical!r}")
    year, month, day = m.groups()
    if code == 0:
        return Literal(d.lexical)
    try:
        if code == 7:
            if day is None:
                raise InvalidDateError(f"trust code 7 needs a full date, got {d.lexical!r}")
            return Literal(f"{year}-{month}-{day}", Iri(XSD_DATE))
        if code >= 5:
            if month is None:
                raise InvalidDateError(f"trust code {code} needs year and month, got {d.lexical!r}")
            return Literal(f"{year}-{month}", Iri(XSD_GYEARMONTH))
        return Literal(year, Iri(XSD_GYEAR))
    except ValueError as exc:
        if isinstance(exc, InvalidDateError):
            raise
        raise InvalidDateError(f"not a valid date: {d.lexical!r}") from None


def scalar_to_literal(value) -> Optional[Literal]:
    """Typed literal for a property value, or None when no triple is emitted."""
    if value is None:
        return None
    if isinstance(value, TrustCodedDate):
        return trust_date_to_literal(value)
    if isinstance(value, bool):
        return Literal("true" if value else "false", Iri(XSD_BOOLEAN))
    if isinstance(value, int):
        return Literal(str(value), Iri(XSD_INTEGER))
    if isinstance(value, float):
        value = Decimal(repr(value))
    if isinstance(value, Decimal):
        if not value.is_finite():
            return None
        return Literal(format(value, "f"), Iri(XSD_DECIMAL))
    if value == "":
        return None
    return Literal(str(value))


# -- triples ---------------------------------------------------------------

def _property_literals(d: EntityDetail):
    for name, value in d.properties.items():
        try:
            lit = scalar_to_literal(value)
        except (InvalidDateError, InvalidTrustError) as exc:
            log.warning("dropping %s of %s/%s: %s", name, d.entity_type, d.permalink, exc)
            continue
        if lit is not None:
            yield name, lit


def entity_to_triples(d: EntityDetail, sameas=None, base=DEFAULT_BASE_IRI) -> TripleSet:
    """Flatten one entity into triples.

    ``sameas`` is anything with an ``externals(iri)`` method (see
    :class:`linkedcb.linker.SameAsStore`); its links for the entity are appended.
    """
    subject = d.iri(base)
    g = TripleSet()
    g.add(Triple(subject, Iri(RDF_TYPE), class_iri(d.entity_type)))
    for name, lit in _property_literals(d):
        g.add(Triple(subject, property_iri(name), lit))
    for relation, page in d.relationships.items():
        predicate = property_iri(relation)
        for item in page.first_page_items:
            g.add(Triple(subject, predicate, item.iri(base)))
    if sameas is not None:
        for external in sameas.externals(subject):
            g.add(Triple(subject, Iri(OWL_SAMEAS), external))
    return g


def relation_items_to_triples(owner: Iri, relation: str, items, base=DEFAULT_BASE_IRI) -> TripleSet:
    predicate = property_iri(relation)
    return TripleSet(Triple(owner, predicate, item.iri(base)) for item in items)


def summary_to_triples(page: SummaryPage, base=DEFAULT_BASE_IRI) -> TripleSet:
    return TripleSet(
        Triple(item.iri(base), Iri(RDF_TYPE), class_iri(item.entity_type)) for item in page.items
    )


# -- JSON-LD ---------------------------------------------------------------

def _compact_datatype(dt: Iri) -> str:
    if dt.value.startswith(XSD):
        return "xsd:" + dt.value[len(XSD):]
    return dt.value


def _value_object(lit: Literal):
    if lit.datatype is not None:
        return {"@value": lit.lexical, "@type": _compact_datatype(lit.datatype)}
    if lit.language is not None:
        return {"@value": lit.lexical, "@language": lit.language}
    return lit.lexical


def to_jsonld(d: EntityDetail, sameas=None, base=DEFAULT_BASE_IRI) -> str:
    subject = d.iri(base)
    context = {"cbw": CBW, "xsd": XSD}
    doc = {"@id": subject.value, "@type": class_iri(d.entity_type).value}
    for name, lit in _property_literals(d):
        context[name] = {"@id": f"cbw:{name}"}
        doc[name] = _value_object(lit)
    for relation, page in d.relationships.items():
        property_iri(relation)
        context[relation] = {"@id": f"cbw:{relation}"}
        doc[relation] = [{"@id": item.iri(base).value} for item in page.first_page_items]
    if sameas is not None:
        links = sorted(e.value for e in sameas.externals(subject))
        if links:
            context["owl"] = OWL
            doc["owl:sameAs"] = [{"@id": v} for v in links]
    return json.dumps({"@context": context, **doc}, indent=2, ensure_ascii=False)


def graph_to_jsonld(g) -> str:
    """Render an arbitrary triple set as expanded-form JSON-LD (one node per subject)."""
    nodes = {}
    for t in g:
        node = nodes.setdefault(t.subject.value, {"@id": t.subject.value})
        obj = {"@id": t.object.value} if isinstance(t.object, Iri) else _expanded_value(t.object)
        node.setdefault(t.predicate.value, []).append(obj)
    graph = []
    for sid in sorted(nodes):
        node = nodes[sid]
        for key, values in node.items():
            if key != "@id":
                values.sort(key=lambda v: json.dumps(v, sort_keys=True))
        graph.append(node)
    return json.dumps({"@graph": graph}, indent=2, ensure_ascii=False)


def _expanded_value(lit: Literal) -> dict:
    out = {"@value": lit.lexical}
    if lit.datatype is not None:
        out["@type"] = lit.datatype.value
    elif lit.language is not None:
        out["@language"] = lit.language
    return out
