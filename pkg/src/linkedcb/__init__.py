"""Linked Data gateway, crawler and entity linker for a paged JSON entity API."""

from .rdf import Iri, Literal, Triple, TripleSet, mint_entity_iri, parse_ntriples, serialize_ntriples
from .vocab import class_iri, emit_ontology, property_iri

__all__ = [
    "Iri",
    "Literal",
    "Triple",
    "TripleSet",
    "class_iri",
    "emit_ontology",
    "mint_entity_iri",
    "parse_ntriples",
    "property_iri",
    "serialize_ntriples",
]

__version__ = "0.1.0"
