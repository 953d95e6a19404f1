"""Build a few triples by hand, serialize them, and look at the vocabulary.

Run:  python demos/01_triples_and_vocabulary.py
"""

from linkedcb import Iri, Literal, Triple, TripleSet, emit_ontology, mint_entity_iri, serialize_ntriples
from linkedcb.namespaces import DEFAULT_BASE_IRI, OWL, RDF_TYPE
from linkedcb.transform import TrustCodedDate, trust_date_to_literal
from linkedcb.vocab import class_iri, property_iri

facebook = mint_entity_iri(DEFAULT_BASE_IRI, "organizations", "facebook")
print("minted:", facebook.value)

g = TripleSet()
g.add(Triple(facebook, Iri(RDF_TYPE), class_iri("organizations")))
g.add(Triple(facebook, property_iri("name"), Literal("Facebook")))
g.add(Triple(facebook, property_iri("short_description"), Literal('Says "hi"\nand more')))
# adding the same triple twice changes nothing
g.add(Triple(facebook, property_iri("name"), Literal("Facebook")))

# upstream dates come with a trust code that says how much of them to believe
for code in (7, 5, 3, 0):
    lit = trust_date_to_literal(TrustCodedDate("2004-02-04", code))
    print(f"trust code {code}: {lit.n3()}")
g.add(Triple(facebook, property_iri("founded_on"), trust_date_to_literal(TrustCodedDate("2004-02-04", 7))))

print()
print(serialize_ntriples(g), end="")

onto = emit_ontology()
classes = list(onto.match(predicate=Iri(RDF_TYPE), obj=Iri(OWL + "Class")))
equivalences = list(onto.match(predicate=Iri(OWL + "equivalentClass")))
print()
print(f"ontology: {len(onto)} triples, {len(classes)} classes")
for t in sorted(equivalences, key=lambda t: t.subject.value):
    print("  ", t.n3())
