"""Resumable crawl of the upstream API into one deduplicated N-Triples dump.

The crawl runs in three kinds of units, each one upstream request:

* index pages   ``{type}`` and their ``next_page_url`` continuations,
* entity details ``{type}/{permalink}`` (from index pages and seed CSVs),
* extra relation pages ``{type}/{permalink}/{relation}?page=N`` for
  relationships truncated in the detail payload.

After every unit its triples are appended to an on-disk spill and a record is
appended to the checkpoint log.  The final dump is the sorted, de-duplicated
spill, so an interrupted and resumed crawl produces the same bytes as an
uninterrupted one.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import heapq
import io
import json
import logging
import os
import tempfile
from collections import Counter, deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional

from .errors import (
    CheckpointError,
    InvalidKeyError,
    InvalidPermalinkError,
    InvalidTypeError,
    LinkedCBError,
    SeedSchemaError,
    UnknownEntityError,
    UpstreamError,
    WrongPayloadError,
)
from .namespaces import CBW, DEFAULT_BASE_IRI, ENTITY_TYPES, OWL_SAMEAS, RDF_TYPE, VOID
from .rdf import (
    XSD_INTEGER,
    Iri,
    Literal,
    Triple,
    TripleSet,
    iter_ntriples,
    mint_entity_iri,
    open_text,
    write_ntriples_file,
)
from .transform import (
    SummaryPage,
    entity_to_triples,
    relation_items_to_triples,
    strip_metadata,
)
from .upstream import ApiKey, UpstreamClient, shared_gate

log = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "linkedcb-crawl/1"

_TYPE_ALIASES = {}
for _name, _local in ENTITY_TYPES.items():
    for _alias in (_name, _local, _local.lower(), _name.replace("-", "_"), _name.replace("-", " ")):
        _TYPE_ALIASES[_alias.lower()] = _name
_TYPE_ALIASES["funding_round"] = "funding-rounds"
_TYPE_ALIASES["funding round"] = "funding-rounds"


class CrawlInterrupted(LinkedCBError):
    """Raised when a crawl stops early on request (``stop_after``)."""


@dataclass(frozen=True)
class SeedRow:
    entity_type: str
    permalink: str

    def __post_init__(self):
        mint_entity_iri(DEFAULT_BASE_IRI, self.entity_type, self.permalink)

    @property
    def path(self) -> str:
        return f"{self.entity_type}/{self.permalink}"


class SeedList(list):
    """A list of :class:`SeedRow` that also knows how many rows were skipped."""

    skipped = 0


def ingest_seed_csv(
    file,
    type_column: str = "entity_type",
    permalink_column: str = "permalink",
    entity_type: Optional[str] = None,
) -> SeedList:
    """Read seed rows from a CSV export.

    ``file`` is a path or an open text stream.  With ``entity_type`` set the
    type column is not required and every row gets that type.
    """
    if hasattr(file, "read"):
        return _ingest(file, type_column, permalink_column, entity_type)
    with open(file, newline="", encoding="utf-8") as fh:
        return _ingest(fh, type_column, permalink_column, entity_type)


def _ingest(fh, type_column, permalink_column, entity_type) -> SeedList:
    reader = csv.DictReader(fh)
    columns = set(reader.fieldnames or ())
    required = {permalink_column} | (set() if entity_type else {type_column})
    missing = required - columns
    if missing:
        raise SeedSchemaError(f"seed CSV lacks column(s): {', '.join(sorted(missing))}")
    rows, seen = SeedList(), set()
    for record in reader:
        raw_type = entity_type or (record.get(type_column) or "")
        etype = _TYPE_ALIASES.get(raw_type.strip().lower())
        try:
            row = SeedRow(etype or raw_type, (record.get(permalink_column) or "").strip())
        except (InvalidTypeError, InvalidPermalinkError):
            rows.skipped += 1
            continue
        if row not in seen:
            seen.add(row)
            rows.append(row)
    return rows


# -- statistics --------------------------------------------------------------

@dataclass
class CrawlStats:
    triples: int = 0
    entities: int = 0
    type_triples: int = 0
    sameas_links: int = 0
    instances: dict = field(default_factory=dict)  # class IRI -> distinct subjects
    object_properties: dict = field(default_factory=dict)  # predicate IRI -> triples
    datatype_properties: dict = field(default_factory=dict)

    @property
    def classes(self) -> int:
        return len(self.instances)

    @property
    def properties(self) -> int:
        extra = (1 if self.type_triples else 0) + (1 if self.sameas_links else 0)
        return len(self.object_properties) + len(self.datatype_properties) + extra

    def to_tsv(self) -> str:
        rows = [
            ("total", "triples", self.triples),
            ("total", "entities", self.entities),
            ("total", "classes", self.classes),
            ("total", "properties", self.properties),
            ("total", "type_triples", self.type_triples),
            ("total", "sameas_links", self.sameas_links),
        ]
        rows += [("class", k, v) for k, v in sorted(self.instances.items())]
        rows += [("object_property", k, v) for k, v in sorted(self.object_properties.items())]
        rows += [("datatype_property", k, v) for k, v in sorted(self.datatype_properties.items())]
        out = io.StringIO()
        writer = csv.writer(out, delimiter="\t", lineterminator="\n")
        writer.writerow(("kind", "name", "count"))
        writer.writerows(rows)
        return out.getvalue()


def compute_stats(dump: Iterable[Triple]) -> CrawlStats:
    """Count classes, properties and links.

    A plain iterable is assumed to be duplicate-free (e.g. a sorted dump).
    rdf:type and owl:sameAs are counted on their own, outside the object
    property partition.
    """
    members = {}
    typed = set()
    obj_props, data_props = Counter(), Counter()
    stats = CrawlStats()
    for t in dump:
        stats.triples += 1
        p = t.predicate.value
        if p == RDF_TYPE:
            stats.type_triples += 1
            members.setdefault(t.object.value, set()).add(t.subject)
            typed.add(t.subject)
        elif p == OWL_SAMEAS:
            stats.sameas_links += 1
        elif isinstance(t.object, Iri):
            obj_props[p] += 1
        else:
            data_props[p] += 1
    stats.entities = len(typed)
    stats.instances = {k: len(v) for k, v in members.items()}
    stats.object_properties = dict(obj_props)
    stats.datatype_properties = dict(data_props)
    return stats


def _int(n: int) -> Literal:
    return Literal(str(n), Iri(XSD_INTEGER))


def emit_void(stats: CrawlStats, dataset_iri) -> TripleSet:
    ds = dataset_iri if isinstance(dataset_iri, Iri) else Iri(dataset_iri)
    base = ds.value.split("#", 1)[0]
    a = Iri(RDF_TYPE)
    g = TripleSet()
    g.add(Triple(ds, a, Iri(VOID + "Dataset")))
    g.add(Triple(ds, Iri(VOID + "triples"), _int(stats.triples)))
    g.add(Triple(ds, Iri(VOID + "entities"), _int(stats.entities)))
    g.add(Triple(ds, Iri(VOID + "classes"), _int(stats.classes)))
    g.add(Triple(ds, Iri(VOID + "properties"), _int(stats.properties)))
    g.add(Triple(ds, Iri(VOID + "vocabulary"), Iri(CBW)))
    for cls, count in stats.instances.items():
        local = cls.rsplit("#", 1)[-1].rsplit("/", 1)[-1]
        part = Iri(f"{base}#class-{local}")
        g.add(Triple(ds, Iri(VOID + "classPartition"), part))
        g.add(Triple(part, Iri(VOID + "class"), Iri(cls)))
        g.add(Triple(part, Iri(VOID + "entities"), _int(count)))
    linkset = Iri(f"{base}#sameas-links")
    g.add(Triple(ds, Iri(VOID + "subset"), linkset))
    g.add(Triple(linkset, a, Iri(VOID + "Linkset")))
    g.add(Triple(linkset, Iri(VOID + "linkPredicate"), Iri(OWL_SAMEAS)))
    g.add(Triple(linkset, Iri(VOID + "subjectsTarget"), ds))
    g.add(Triple(linkset, Iri(VOID + "triples"), _int(stats.sameas_links)))
    return g


def read_void_counts(void: TripleSet, dataset_iri) -> dict:
    """Integer VoID counts keyed by local name (plus ``class:<iri>`` and ``linkset``)."""
    ds = dataset_iri if isinstance(dataset_iri, Iri) else Iri(dataset_iri)
    out = {}
    for t in void.match(subject=ds):
        if isinstance(t.object, Literal):
            out[t.predicate.value[len(VOID):]] = int(t.object.lexical)
    for t in void.match(predicate=Iri(VOID + "class")):
        for c in void.match(subject=t.subject, predicate=Iri(VOID + "entities")):
            out["class:" + t.object.value] = int(c.object.lexical)
    for t in void.match(predicate=Iri(RDF_TYPE), obj=Iri(VOID + "Linkset")):
        for c in void.match(subject=t.subject, predicate=Iri(VOID + "triples")):
            out["linkset"] = int(c.object.lexical)
    return out


# -- checkpoint ----------------------------------------------------------------

def _truncate_torn_tail(path: Path) -> None:
    """Drop a trailing partial line left by an interrupted append."""
    if not path.exists():
        return
    with open(path, "rb+") as fh:
        data = fh.read()
        if data and not data.endswith(b"\n"):
            fh.truncate(data.rfind(b"\n") + 1)


class CrawlCheckpoint:
    """Append-only log of completed units plus the triple spill they produced.

    Line 1 is a header naming the crawl it belongs to; each further line is a
    JSON record ``{"path", "found", "triples"[, "error"]}``.
    """

    def __init__(self, path):
        self.path = Path(path)
        self.spill_path = Path(f"{path}.spill")
        self.error_path = Path(f"{path}.errors")
        self.frontier = deque()
        self.completed = set()
        self.triples_written = 0
        self._queued = set()
        self._log = None
        self._spill = None

    def exists(self) -> bool:
        return self.path.exists()

    def remove(self) -> None:
        for p in (self.path, self.spill_path, self.error_path):
            if p.exists():
                p.unlink()

    def enqueue(self, paths) -> list:
        added = []
        for p in paths:
            if p not in self._queued:
                self._queued.add(p)
                self.frontier.append(p)
                added.append(p)
        return added

    def start(self, fingerprint: str, initial, resume: bool) -> None:
        self.enqueue(initial)
        if resume:
            self._replay(fingerprint)
        else:
            self.remove()
            with open(self.path, "w", encoding="utf-8") as fh:
                fh.write(json.dumps({"format": CHECKPOINT_FORMAT, "fingerprint": fingerprint}) + "\n")
            self.spill_path.touch()
            self.error_path.touch()
        self._log = open(self.path, "a", encoding="utf-8")
        self._spill = open(self.spill_path, "a", encoding="utf-8", newline="\n")

    def _replay(self, fingerprint: str) -> None:
        _truncate_torn_tail(self.path)
        _truncate_torn_tail(self.spill_path)
        self.spill_path.touch()
        self.error_path.touch()
        with open(self.path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        try:
            header = json.loads(lines[0])
            if header.get("format") != CHECKPOINT_FORMAT:
                raise ValueError("unknown format")
        except (IndexError, ValueError, AttributeError):
            raise CheckpointError(f"{self.path}: corrupt checkpoint header; rerun with --fresh") from None
        if header.get("fingerprint") != fingerprint:
            raise CheckpointError(f"{self.path}: checkpoint belongs to a different crawl; rerun with --fresh")
        for no, line in enumerate(lines[1:], 2):
            try:
                record = json.loads(line)
                path, found, triples = record["path"], record["found"], int(record["triples"])
            except (ValueError, KeyError, TypeError):
                raise CheckpointError(f"{self.path}:{no}: corrupt record; rerun with --fresh") from None
            if not self.frontier or self.frontier[0] != path:
                raise CheckpointError(f"{self.path}:{no}: record out of order; rerun with --fresh")
            self.frontier.popleft()
            self.completed.add(path)
            self.triples_written += triples
            self.enqueue(found)

    def commit(self, path: str, lines: list, found: list, error: Optional[str] = None) -> None:
        if lines:
            self._spill.write("".join(line + "\n" for line in lines))
        self._spill.flush()
        os.fsync(self._spill.fileno())
        record = {"path": path, "found": found, "triples": len(lines)}
        if error:
            record["error"] = error
            with open(self.error_path, "a", encoding="utf-8") as fh:
                fh.write(f"{path}\t{error}\n")
        self._log.write(json.dumps(record) + "\n")
        self._log.flush()
        os.fsync(self._log.fileno())
        self.completed.add(path)
        self.triples_written += len(lines)

    def close(self) -> None:
        for fh in (self._log, self._spill):
            if fh is not None:
                fh.close()
        self._log = self._spill = None


def sorted_unique_lines(path, chunk_lines: int = 1_000_000, tmpdir=None):
    """Yield the distinct lines of ``path`` in code-point order.

    Files larger than ``chunk_lines`` are sorted in runs on disk and merged.
    """
    runs, buf = [], set()

    def flush():
        run = tempfile.TemporaryFile("w+", encoding="utf-8", dir=tmpdir)
        run.writelines(line + "\n" for line in sorted(buf))
        run.seek(0)
        runs.append(run)
        buf.clear()

    with open(path, encoding="utf-8", newline="\n") as fh:
        for line in fh:
            buf.add(line.rstrip("\n"))
            if len(buf) >= chunk_lines:
                flush()
    if not runs:
        yield from sorted(buf)
        return
    if buf:
        flush()
    try:
        last = None
        for line in heapq.merge(*((l.rstrip("\n") for l in run) for run in runs)):
            if line != last:
                yield line
                last = line
    finally:
        for run in runs:
            run.close()


# -- crawl -----------------------------------------------------------------------

def _kind(path: str) -> str:
    depth = len(path.split("?", 1)[0].strip("/").split("/"))
    return {1: "index", 2: "detail", 3: "relation"}.get(depth, "unknown")


class Crawler:
    def __init__(
        self,
        client: UpstreamClient,
        key: ApiKey,
        out,
        checkpoint=None,
        void_path=None,
        stats_path=None,
        sameas=None,
        base_iri: str = DEFAULT_BASE_IRI,
        dataset_iri: Optional[str] = None,
        index_types: Optional[Iterable[str]] = None,
        spill_chunk_lines: int = 1_000_000,
        unit_attempts: int = 2,
    ):
        self.client = client
        self.key = key
        self.out = str(out)
        self.checkpoint = CrawlCheckpoint(checkpoint or f"{out}.checkpoint")
        self.void_path = void_path
        self.stats_path = stats_path
        self.sameas = sameas
        self.base_iri = base_iri.rstrip("/")
        self.dataset_iri = dataset_iri or f"{self.base_iri}/dataset"
        self.index_types = list(ENTITY_TYPES) if index_types is None else list(index_types)
        for t in self.index_types:
            if t not in ENTITY_TYPES:
                raise InvalidTypeError(f"unknown entity type: {t!r}")
        self.spill_chunk_lines = spill_chunk_lines
        self.unit_attempts = unit_attempts
        self.requests_made = 0

    def _fingerprint(self, initial) -> str:
        h = hashlib.sha256()
        h.update(json.dumps([self.base_iri, initial]).encode("utf-8"))
        return h.hexdigest()

    def run(self, seeds: Iterable[SeedRow] = (), resume: bool = False, fresh: bool = False,
            stop_after: Optional[int] = None) -> CrawlStats:
        initial = list(self.index_types)
        for s in seeds:
            if s.path not in initial:
                initial.append(s.path)
        cp = self.checkpoint
        if cp.exists() and not (resume or fresh):
            raise CheckpointError(f"{cp.path} exists; pass resume or fresh")
        cp.start(self._fingerprint(initial), initial, resume=resume and cp.exists())
        done_now = 0
        try:
            while cp.frontier:
                if stop_after is not None and done_now >= stop_after:
                    raise CrawlInterrupted(f"stopped after {done_now} units")
                path = cp.frontier[0]
                lines, found, error = self._unit(path)
                cp.frontier.popleft()
                cp.commit(path, lines, cp.enqueue(found), error)
                done_now += 1
        finally:
            cp.close()
        return self._finish()

    def _unit(self, path: str):
        kind = _kind(path)
        last_error = None
        for _ in range(self.unit_attempts):
            try:
                self.requests_made += 1
                env = self.client.fetch(path, self.key)
                triples, found = self._transform(kind, path, env)
                return sorted(t.n3() for t in triples), found, None
            except InvalidKeyError:
                raise
            except (UnknownEntityError, WrongPayloadError) as exc:
                last_error = exc
                break
            except UpstreamError as exc:
                last_error = exc
        log.warning("giving up on %s: %s", path, self.key.redact(str(last_error)))
        return [], [], self.key.redact(str(last_error)) or type(last_error).__name__

    def _transform(self, kind, path, env):
        found = []
        if kind == "detail":
            d = strip_metadata(env)
            triples = entity_to_triples(d, self.sameas, self.base_iri)
            for relation, page in d.relationships.items():
                if page.next_page_url:
                    found.append(self.client.relative(page.next_page_url))
            return triples, found
        page = env.data
        if not isinstance(page, SummaryPage):
            raise WrongPayloadError(f"{path}: expected a paged list")
        if kind == "index":
            triples = TripleSet()
            found.extend(item.api_path for item in page.items)
        elif kind == "relation":
            etype, permalink, relation = path.split("?", 1)[0].split("/")
            owner = mint_entity_iri(self.base_iri, etype, permalink)
            triples = relation_items_to_triples(owner, relation, page.items, self.base_iri)
        else:
            raise WrongPayloadError(f"cannot crawl {path}")
        if page.next_page_url:
            found.append(self.client.relative(page.next_page_url))
        return triples, found

    def _finish(self) -> CrawlStats:
        out = Path(self.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        tmp = f"{self.out}.tmp" + (".gz" if self.out.endswith(".gz") else "")
        with open_text(tmp, "w") as fh:
            for line in sorted_unique_lines(self.checkpoint.spill_path, self.spill_chunk_lines, out.parent):
                fh.write(line + "\n")
        os.replace(tmp, self.out)
        with open_text(self.out) as fh:
            stats = compute_stats(iter_ntriples(fh))
        if self.stats_path:
            with open(self.stats_path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(stats.to_tsv())
        if self.void_path:
            write_ntriples_file(self.void_path, emit_void(stats, self.dataset_iri))
        return stats


def crawl(seeds, key: ApiKey, out, client: Optional[UpstreamClient] = None, resume=False, fresh=False,
          stop_after=None, **options) -> CrawlStats:
    crawler = Crawler(client or UpstreamClient(), key, out, **options)
    return crawler.run(seeds, resume=resume, fresh=fresh, stop_after=stop_after)


def _parse_index_types(value: Optional[str]) -> Optional[List[str]]:
    if value is None:
        return None
    if value.strip().lower() == "none":
        return []
    return [t.strip() for t in value.split(",") if t.strip()]


def main(argv=None):
    from .linker import SameAsStore

    parser = argparse.ArgumentParser(prog="crawler", description="Crawl the upstream API into an N-Triples dump.")
    parser.add_argument("--seeds", nargs="*", default=[], help="seed CSV files")
    parser.add_argument("--out", required=True, help="dump path (.nt or .nt.gz)")
    parser.add_argument("--void")
    parser.add_argument("--stats")
    parser.add_argument("--checkpoint")
    mode = parser.add_mutually_exclusive_group()
    mode.add_argument("--resume", action="store_true")
    mode.add_argument("--fresh", action="store_true")
    parser.add_argument("--rate-ms", type=int, default=1000)
    parser.add_argument("--upstream", default=os.environ.get("UPSTREAM_BASE"))
    parser.add_argument("--index-types", help="comma-separated entity types to list, or none (default: all)")
    parser.add_argument("--type-column", default="entity_type")
    parser.add_argument("--permalink-column", default="permalink")
    parser.add_argument("--entity-type", help="entity type for seed CSVs without a type column")
    parser.add_argument("--sameas", default=os.environ.get("SAMEAS_PATH"))
    parser.add_argument("--base-iri", default=os.environ.get("BASE_IRI", DEFAULT_BASE_IRI))
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO)

    key = ApiKey.from_env()
    if key is None:
        parser.error("set CB_API_KEY")
    seeds = []
    for path in args.seeds:
        rows = ingest_seed_csv(path, args.type_column, args.permalink_column, args.entity_type)
        if rows.skipped:
            log.info("%s: skipped %d malformed rows", path, rows.skipped)
        seeds.extend(rows)
    client = UpstreamClient(args.upstream, gate=shared_gate(args.rate_ms / 1000.0))
    stats = crawl(
        seeds, key, args.out, client=client, resume=args.resume, fresh=args.fresh,
        checkpoint=args.checkpoint, void_path=args.void, stats_path=args.stats,
        sameas=SameAsStore.from_file(args.sameas) if args.sameas else None,
        base_iri=args.base_iri,
        index_types=_parse_index_types(args.index_types),
    )
    log.info("dump written: %d triples, %d entities", stats.triples, stats.entities)


if __name__ == "__main__":
    main()
