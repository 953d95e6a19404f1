"""The Crunchbase vocabulary (``cbw:``) and its schema.org alignment."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import InvalidFieldError, InvalidTypeError
from .namespaces import (
    CBW,
    CBW_ONTOLOGY,
    DCTERMS,
    ENTITY_TYPES,
    OWL,
    RDF_TYPE,
    RDFS,
    SCHEMA,
    VANN,
    VOAF,
    XSD,
)
from .rdf import Iri, Literal, Triple, TripleSet

SNAKE_CASE_RE = re.compile(r"[a-z][a-z0-9]*(_[a-z0-9]+)*\Z")


@dataclass(frozen=True)
class EntityTypeDescriptor:
    name: str
    class_iri: Iri
    singular_label: str


@dataclass(frozen=True)
class MappingEntry:
    local: Iri
    external: Iri
    kind: str  # equivalentClass | subClassOf | equivalentProperty | subPropertyOf


def _label(local_name: str) -> str:
    return re.sub(r"(?<=[a-z])(?=[A-Z])", " ", local_name)


DESCRIPTORS = tuple(
    EntityTypeDescriptor(name, Iri(CBW + local), _label(local)) for name, local in ENTITY_TYPES.items()
)
_BY_NAME = {d.name: d for d in DESCRIPTORS}


def class_iri(entity_type: str) -> Iri:
    try:
        return _BY_NAME[entity_type].class_iri
    except KeyError:
        raise InvalidTypeError(f"unknown entity type: {entity_type!r}") from None


def entity_type_of_class(iri: Iri) -> str:
    for d in DESCRIPTORS:
        if d.class_iri == iri:
            return d.name
    raise InvalidTypeError(f"not a cbw class: {iri}")


def property_iri(field_name: str) -> Iri:
    if not isinstance(field_name, str) or not SNAKE_CASE_RE.match(field_name):
        raise InvalidFieldError(f"not a snake_case field name: {field_name!r}")
    return Iri(CBW + field_name)


# Upstream scalar fields, as delivered by the v3.1 entity payloads.
DATATYPE_PROPERTIES = (
    "name", "short_description", "description", "homepage_url", "founded_on", "closed_on",
    "is_closed", "num_employees_min", "num_employees_max", "total_funding_usd", "stock_symbol",
    "stock_exchange", "role_company", "role_investor", "role_group", "role_school", "primary_role",
    "email_address", "phone_number", "facebook_url", "twitter_url", "linkedin_url", "created_at",
    "updated_at", "rank", "first_name", "last_name", "gender", "born_on", "died_on", "bio",
    "also_known_as", "title", "started_on", "ended_on", "is_current", "job_type", "degree_type_name",
    "degree_subject", "completed_on", "is_completed", "funding_type", "series", "announced_on",
    "money_raised", "money_raised_usd", "money_raised_currency_code", "price", "price_usd",
    "payment_type", "acquisition_type", "acquisition_status", "went_public_on", "shares_sold",
    "opening_share_price", "money_invested", "money_invested_usd", "is_lead_investor", "author",
    "posted_on", "url", "publisher", "website_type", "street_1", "street_2", "postal_code", "city",
    "region", "country", "country_code", "latitude", "longitude", "location_type", "short_name",
    "category_groups", "asset_path", "content_type", "height", "width", "service_name",
)

# Upstream relationship names; all of them point at other entities.
OBJECT_PROPERTIES = (
    "founders", "current_team", "past_team", "board_members_and_advisors", "investors", "owned_by",
    "sub_organizations", "headquarters", "offices", "categories", "funding_rounds", "investments",
    "acquisitions", "acquired_by", "ipo", "funds", "websites", "images", "videos", "news", "jobs",
    "degrees", "primary_affiliation", "primary_location", "primary_image", "advisory_roles",
    "founded_companies", "person", "organization", "school", "funded_organization", "invested_in",
    "investor", "partners", "acquirer", "acquiree", "location", "parent_locations", "members",
    "continent", "next_page_url",
)


def _m(local, external, kind):
    return MappingEntry(Iri(CBW + local), Iri(SCHEMA + external), kind)


MAPPINGS = (
    # the complete equivalentClass set
    _m("Address", "Place", "equivalentClass"),
    _m("Image", "ImageObject", "equivalentClass"),
    _m("News", "NewsArticle", "equivalentClass"),
    _m("Organization", "Organization", "equivalentClass"),
    _m("Person", "Person", "equivalentClass"),
    _m("Video", "VideoObject", "equivalentClass"),
    _m("Website", "WebSite", "equivalentClass"),
    # curated; not an exhaustive reconstruction
    _m("Location", "Place", "subClassOf"),
    _m("Category", "DefinedTerm", "subClassOf"),
    _m("Job", "OrganizationRole", "subClassOf"),
    _m("Degree", "EducationalOccupationalCredential", "subClassOf"),
    _m("Ipo", "Event", "subClassOf"),
    _m("name", "name", "equivalentProperty"),
    _m("description", "description", "equivalentProperty"),
    _m("founded_on", "foundingDate", "equivalentProperty"),
    _m("closed_on", "dissolutionDate", "equivalentProperty"),
    _m("born_on", "birthDate", "equivalentProperty"),
    _m("died_on", "deathDate", "equivalentProperty"),
    _m("gender", "gender", "equivalentProperty"),
    _m("first_name", "givenName", "equivalentProperty"),
    _m("last_name", "familyName", "equivalentProperty"),
    _m("email_address", "email", "equivalentProperty"),
    _m("phone_number", "telephone", "equivalentProperty"),
    _m("postal_code", "postalCode", "equivalentProperty"),
    _m("latitude", "latitude", "equivalentProperty"),
    _m("longitude", "longitude", "equivalentProperty"),
    _m("also_known_as", "alternateName", "equivalentProperty"),
    _m("founders", "founder", "equivalentProperty"),
    _m("sub_organizations", "subOrganization", "equivalentProperty"),
    _m("owned_by", "parentOrganization", "equivalentProperty"),
    _m("homepage_url", "url", "subPropertyOf"),
    _m("short_description", "description", "subPropertyOf"),
    _m("bio", "description", "subPropertyOf"),
    _m("headquarters", "location", "subPropertyOf"),
    _m("offices", "location", "subPropertyOf"),
    _m("primary_location", "location", "subPropertyOf"),
    _m("members", "member", "subPropertyOf"),
)

_KIND_PREDICATE = {
    "equivalentClass": Iri(OWL + "equivalentClass"),
    "subClassOf": Iri(RDFS + "subClassOf"),
    "equivalentProperty": Iri(OWL + "equivalentProperty"),
    "subPropertyOf": Iri(RDFS + "subPropertyOf"),
}


def emit_ontology() -> TripleSet:
    """OWL description of the vocabulary, VOAF metadata and schema.org links."""
    g = TripleSet()
    a = Iri(RDF_TYPE)
    onto = Iri(CBW_ONTOLOGY)
    defined_by = Iri(RDFS + "isDefinedBy")
    label = Iri(RDFS + "label")

    g.add(Triple(onto, a, Iri(OWL + "Ontology")))
    g.add(Triple(onto, a, Iri(VOAF + "Vocabulary")))
    g.add(Triple(onto, Iri(DCTERMS + "title"), Literal("Crunchbase Vocabulary", language="en")))
    g.add(Triple(onto, Iri(VANN + "preferredNamespacePrefix"), Literal("cbw")))
    g.add(Triple(onto, Iri(VANN + "preferredNamespaceUri"), Literal(CBW)))
    g.add(Triple(onto, Iri(VOAF + "reliesOn"), Iri(SCHEMA)))
    g.add(Triple(onto, Iri(VOAF + "classNumber"), Literal(str(len(DESCRIPTORS)), Iri(XSD + "integer"))))
    n_props = len(DATATYPE_PROPERTIES) + len(OBJECT_PROPERTIES)
    g.add(Triple(onto, Iri(VOAF + "propertyNumber"), Literal(str(n_props), Iri(XSD + "integer"))))

    for d in DESCRIPTORS:
        g.add(Triple(d.class_iri, a, Iri(OWL + "Class")))
        g.add(Triple(d.class_iri, label, Literal(d.singular_label, language="en")))
        g.add(Triple(d.class_iri, defined_by, onto))
    for kind, names in (("DatatypeProperty", DATATYPE_PROPERTIES), ("ObjectProperty", OBJECT_PROPERTIES)):
        for name in names:
            p = property_iri(name)
            g.add(Triple(p, a, Iri(OWL + kind)))
            g.add(Triple(p, defined_by, onto))
    for m in MAPPINGS:
        g.add(Triple(m.local, _KIND_PREDICATE[m.kind], m.external))
    return g


def declared_properties() -> frozenset:
    """Every predicate IRI the transform may emit for catalogued fields."""
    return frozenset(property_iri(n) for n in DATATYPE_PROPERTIES + OBJECT_PROPERTIES)
