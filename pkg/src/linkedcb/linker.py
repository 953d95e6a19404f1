"""owl:sameAs links from local entities to an external encyclopedic corpus.

Organizations match on the homepage host name, people on (name, birth date).
A key that resolves to more than one external entity yields no link at all;
precision wins over recall.
"""

from __future__ import annotations

import argparse
import csv
import logging
import re
import sys
import unicodedata
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional
from urllib.parse import urlsplit

from .errors import InvalidDateError, InvalidTrustError, UnparseableUrlError
from .namespaces import CBW, DBO, DEFAULT_BASE_IRI, FOAF, OWL_SAMEAS, RDF_TYPE
from .rdf import (
    XSD_DATE,
    XSD_GYEAR,
    XSD_GYEARMONTH,
    Iri,
    Literal,
    Triple,
    TripleSet,
    iter_ntriples,
    mint_entity_iri,
    open_text,
    read_ntriples_file,
    serialize_ntriples,
)
from .transform import TrustCodedDate, trust_date_to_literal

log = logging.getLogger(__name__)

ORG_METHOD = "org-fqdn"
PERSON_METHOD = "person-name-dob"

DEFAULT_HOMEPAGE_PREDICATES = (FOAF + "homepage",)
DEFAULT_NAME_PREDICATES = (FOAF + "name",)
DEFAULT_BIRTH_PREDICATES = (DBO + "birthDate",)

_HOST_RE = re.compile(r"[^\s/?#@:\[\]<>\"'`{}|\\^]+\Z")
_FULL_DATE_RE = re.compile(r"\d{4}-\d{2}-\d{2}\Z")


@dataclass(frozen=True)
class SameAsMapping:
    local: Iri
    external: Iri
    method: str
    evidence: str


@dataclass
class LinkReport:
    mappings: dict = field(default_factory=lambda: defaultdict(int))
    skipped: dict = field(default_factory=lambda: defaultdict(int))
    ambiguities: list = field(default_factory=list)  # (method, local, key, candidates)

    def render(self) -> str:
        lines = []
        for method in (ORG_METHOD, PERSON_METHOD):
            amb = sum(1 for a in self.ambiguities if a[0] == method)
            lines.append(f"{method}\tmappings\t{self.mappings[method]}")
            lines.append(f"{method}\tskipped\t{self.skipped[method]}")
            lines.append(f"{method}\tambiguous\t{amb}")
        for method, local, key, candidates in self.ambiguities:
            lines.append(f"ambiguous\t{method}\t{local.value}\t{key}\t{' '.join(c.value for c in sorted(candidates, key=str))}")
        return "\n".join(lines) + "\n"


def normalize_fqdn(url: str) -> str:
    """Host name of ``url``: lowercased, one leading ``www.`` removed, no port."""
    if not isinstance(url, str) or not url.strip():
        raise UnparseableUrlError(f"no host in {url!r}")
    text = url.strip()
    if "://" not in text:
        text = "http://" + text.lstrip("/")
    try:
        parts = urlsplit(text)
        host = parts.hostname
        parts.port  # raises on a non-numeric port
    except ValueError:
        raise UnparseableUrlError(f"no host in {url!r}") from None
    if not host or not _HOST_RE.match(host) or host.startswith(".") or ".." in host:
        raise UnparseableUrlError(f"no host in {url!r}")
    host = host.rstrip(".")
    if host.startswith("www."):
        host = host[4:]
    if not host:
        raise UnparseableUrlError(f"no host in {url!r}")
    return host


def normalize_name(name: str) -> str:
    """Casefold, strip diacritics and collapse whitespace."""
    decomposed = unicodedata.normalize("NFKD", name)
    stripped = "".join(c for c in decomposed if not unicodedata.combining(c))
    return " ".join(stripped.casefold().split())


class HomepageIndex:
    def __init__(self):
        self.by_fqdn = defaultdict(set)

    def add(self, fqdn: str, external: Iri) -> None:
        self.by_fqdn[fqdn].add(external)

    def candidates(self, fqdn: str) -> set:
        return self.by_fqdn.get(fqdn, set())

    @classmethod
    def from_triples(cls, triples: Iterable[Triple], predicates=DEFAULT_HOMEPAGE_PREDICATES) -> "HomepageIndex":
        preds = {p if isinstance(p, Iri) else Iri(p) for p in predicates}
        index = cls()
        for t in triples:
            if t.predicate not in preds:
                continue
            value = t.object.value if isinstance(t.object, Iri) else t.object.lexical
            try:
                index.add(normalize_fqdn(value), t.subject)
            except UnparseableUrlError:
                continue
        return index


class PersonIndex:
    def __init__(self):
        self.by_key = defaultdict(set)

    def add(self, name: str, birth_date: str, external: Iri) -> None:
        self.by_key[(normalize_name(name), birth_date)].add(external)

    def candidates(self, name: str, birth_date: str) -> set:
        return self.by_key.get((normalize_name(name), birth_date), set())

    @classmethod
    def from_triples(
        cls,
        triples: Iterable[Triple],
        name_predicates=DEFAULT_NAME_PREDICATES,
        birth_predicates=DEFAULT_BIRTH_PREDICATES,
    ) -> "PersonIndex":
        name_preds = {p if isinstance(p, Iri) else Iri(p) for p in name_predicates}
        birth_preds = {p if isinstance(p, Iri) else Iri(p) for p in birth_predicates}
        names, births = defaultdict(set), defaultdict(set)
        for t in triples:
            if not isinstance(t.object, Literal):
                continue
            if t.predicate in name_preds:
                names[t.subject].add(t.object.lexical)
            elif t.predicate in birth_preds:
                lex = t.object.lexical
                dt = t.object.datatype
                if (dt is None or dt.value == XSD_DATE) and _FULL_DATE_RE.match(lex):
                    births[t.subject].add(lex)
        index = cls()
        for subject in names.keys() & births.keys():
            for name in names[subject]:
                for date in births[subject]:
                    index.add(name, date, subject)
        return index


def _resolve(method, keyed, lookup, report):
    """keyed: local -> set of keys; one mapping per local with a unique candidate."""
    out = []
    for local in sorted(keyed, key=str):
        candidates, evidence = set(), []
        for key in sorted(keyed[local]):
            found = lookup(key)
            if found:
                candidates |= found
                evidence.append(key)
        if len(candidates) == 1:
            out.append(SameAsMapping(local, next(iter(candidates)), method, " | ".join(map(_key_str, evidence))))
        elif len(candidates) > 1:
            report.ambiguities.append((method, local, " | ".join(map(_key_str, evidence)), frozenset(candidates)))
            log.info("ambiguous %s key for %s: %d candidates", method, local, len(candidates))
    report.mappings[method] += len(out)
    return out


def _key_str(key) -> str:
    return key if isinstance(key, str) else "\t".join(key)


def link_organizations(local_orgs, index: HomepageIndex, report: Optional[LinkReport] = None) -> list:
    report = report if report is not None else LinkReport()
    keyed = defaultdict(set)
    for local, homepage in local_orgs:
        try:
            keyed[local].add(normalize_fqdn(homepage))
        except UnparseableUrlError:
            report.skipped[ORG_METHOD] += 1
    return _resolve(ORG_METHOD, keyed, index.candidates, report)


def link_persons(local_people, index: PersonIndex, report: Optional[LinkReport] = None) -> list:
    report = report if report is not None else LinkReport()
    keyed = defaultdict(set)
    for local, name, born in local_people:
        if not name or born is None or born.trust_code != 7:
            report.skipped[PERSON_METHOD] += 1
            continue
        try:
            date = trust_date_to_literal(born).lexical
        except (InvalidDateError, InvalidTrustError):
            report.skipped[PERSON_METHOD] += 1
            continue
        keyed[local].add((normalize_name(name), date))
    return _resolve(PERSON_METHOD, keyed, lambda k: index.by_key.get(k, set()), report)


def emit_sameas_dump(mappings: Iterable[SameAsMapping]) -> TripleSet:
    same_as = Iri(OWL_SAMEAS)
    return TripleSet(Triple(m.local, same_as, m.external) for m in mappings)


class SameAsStore:
    """Read-only lookup of owl:sameAs targets per local IRI."""

    def __init__(self, links=None):
        self._links = defaultdict(set)
        for local, external in links or ():
            self._links[local].add(external)

    @classmethod
    def from_triples(cls, triples: Iterable[Triple]) -> "SameAsStore":
        same_as = Iri(OWL_SAMEAS)
        return cls((t.subject, t.object) for t in triples if t.predicate == same_as and isinstance(t.object, Iri))

    @classmethod
    def from_file(cls, path) -> "SameAsStore":
        return cls.from_triples(read_ntriples_file(path))

    def externals(self, local: Iri) -> list:
        return sorted(self._links.get(local, ()), key=str)

    def triples_for(self, local: Iri) -> TripleSet:
        same_as = Iri(OWL_SAMEAS)
        return TripleSet(Triple(local, same_as, e) for e in self._links.get(local, ()))

    def __len__(self):
        return sum(len(v) for v in self._links.values())


# -- local records ----------------------------------------------------------

_PRECISION_CODE = {XSD_DATE: 7, XSD_GYEARMONTH: 5, XSD_GYEAR: 1}


def local_records_from_dump(triples: Iterable[Triple]):
    """Pull (orgs, people) linker inputs out of a crawl dump."""
    organization = Iri(CBW + "Organization")
    person = Iri(CBW + "Person")
    types, fields = defaultdict(set), defaultdict(dict)
    wanted = {CBW + n for n in ("homepage_url", "name", "first_name", "last_name", "born_on")}
    for t in triples:
        if t.predicate.value == RDF_TYPE:
            types[t.subject].add(t.object)
        elif t.predicate.value in wanted and isinstance(t.object, Literal):
            fields[t.subject][t.predicate.value[len(CBW):]] = t.object
    orgs, people = [], []
    for subject in sorted(types, key=str):
        f = fields.get(subject, {})
        if organization in types[subject] and "homepage_url" in f:
            orgs.append((subject, f["homepage_url"].lexical))
        if person in types[subject] and "born_on" in f:
            if "first_name" in f or "last_name" in f:
                name = " ".join(f[k].lexical for k in ("first_name", "last_name") if k in f)
            elif "name" in f:
                name = f["name"].lexical
            else:
                continue
            born = f["born_on"]
            code = _PRECISION_CODE.get(born.datatype.value if born.datatype else None, 0)
            people.append((subject, name, TrustCodedDate(born.lexical, code)))
    return orgs, people


def _local_iri(row, entity_type, base):
    if row.get("iri"):
        return Iri(row["iri"])
    return mint_entity_iri(base, entity_type, row["permalink"])


def read_orgs_csv(path, base=DEFAULT_BASE_IRI) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            (_local_iri(row, "organizations", base), row.get("homepage_url") or row.get("homepage") or "")
            for row in csv.DictReader(fh)
        ]


def read_people_csv(path, base=DEFAULT_BASE_IRI) -> list:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            name = row.get("name") or " ".join(x for x in (row.get("first_name"), row.get("last_name")) if x)
            born = None
            if row.get("born_on"):
                try:
                    born = TrustCodedDate(row["born_on"], int(row.get("born_on_trust_code") or 0))
                except (ValueError, InvalidTrustError):
                    born = None
            out.append((_local_iri(row, "people", base), name, born))
    return out


def _is_ntriples(path: str) -> bool:
    return path.endswith((".nt", ".nt.gz"))


def main(argv=None):
    parser = argparse.ArgumentParser(prog="linker", description="Build owl:sameAs mappings against an N-Triples corpus.")
    parser.add_argument("--orgs", help="CSV (iri|permalink, homepage_url) or an N-Triples crawl dump")
    parser.add_argument("--people", help="CSV (iri|permalink, name|first_name+last_name, born_on, born_on_trust_code) or a dump")
    parser.add_argument("--corpus", nargs="+", required=True, help="external corpus N-Triples files")
    parser.add_argument("--out", required=True)
    parser.add_argument("--report")
    parser.add_argument("--homepage-predicate", action="append")
    parser.add_argument("--name-predicate", action="append")
    parser.add_argument("--birth-predicate", action="append")
    parser.add_argument("--base-iri", default=DEFAULT_BASE_IRI)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO)

    corpus = TripleSet()
    for path in args.corpus:
        skipped = []
        with open_text(path) as fh:
            corpus.update(iter_ntriples(fh, strict=False, skipped=skipped))
        if skipped:
            log.info("%s: skipped %d unparseable lines", path, len(skipped))

    orgs, people = [], []
    if args.orgs:
        orgs = local_records_from_dump(read_ntriples_file(args.orgs))[0] if _is_ntriples(args.orgs) else read_orgs_csv(args.orgs, args.base_iri)
    if args.people:
        people = local_records_from_dump(read_ntriples_file(args.people))[1] if _is_ntriples(args.people) else read_people_csv(args.people, args.base_iri)

    report = LinkReport()
    mappings = link_organizations(orgs, HomepageIndex.from_triples(corpus, args.homepage_predicate or DEFAULT_HOMEPAGE_PREDICATES), report)
    mappings += link_persons(
        people,
        PersonIndex.from_triples(corpus, args.name_predicate or DEFAULT_NAME_PREDICATES, args.birth_predicate or DEFAULT_BIRTH_PREDICATES),
        report,
    )
    with open_text(args.out, "w") as fh:
        fh.write(serialize_ntriples(emit_sameas_dump(mappings)))
    text = report.render()
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
