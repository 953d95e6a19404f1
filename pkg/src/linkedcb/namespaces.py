"""Namespace IRIs and the entity-type whitelist shared by every module."""

CBW = "http://ontologycentral.com/2010/05/cb/vocab#"
CBW_ONTOLOGY = "http://ontologycentral.com/2010/05/cb/vocab"
RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
OWL = "http://www.w3.org/2002/07/owl#"
XSD = "http://www.w3.org/2001/XMLSchema#"
SCHEMA = "http://schema.org/"
FOAF = "http://xmlns.com/foaf/0.1/"
DBO = "http://dbpedia.org/ontology/"
VOID = "http://rdfs.org/ns/void#"
VOAF = "http://purl.org/vocommons/voaf#"
VANN = "http://purl.org/vocab/vann/"
DCTERMS = "http://purl.org/dc/terms/"

RDF_TYPE = RDF + "type"
OWL_SAMEAS = OWL + "sameAs"

DEFAULT_BASE_IRI = "http://linked-crunchbase.org"

# path name -> class local name
ENTITY_TYPES = {
    "news": "News",
    "jobs": "Job",
    "websites": "Website",
    "people": "Person",
    "organizations": "Organization",
    "addresses": "Address",
    "investments": "Investment",
    "degrees": "Degree",
    "funding-rounds": "FundingRound",
    "acquisitions": "Acquisition",
    "ipos": "Ipo",
    "locations": "Location",
    "funds": "Fund",
    "categories": "Category",
    "images": "Image",
    "videos": "Video",
}

PREFIXES = {
    "cbw": CBW,
    "rdf": RDF,
    "rdfs": RDFS,
    "owl": OWL,
    "xsd": XSD,
    "schema": SCHEMA,
}
