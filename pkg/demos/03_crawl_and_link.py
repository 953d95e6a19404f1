"""Crawl the mock upstream into a dump, link it to an external corpus, crawl again.

Writes everything under demos/out/.

Run:  python demos/03_crawl_and_link.py
"""

import shutil
from pathlib import Path

from linkedcb.crawler import crawl
from linkedcb.linker import (
    HomepageIndex,
    LinkReport,
    PersonIndex,
    SameAsStore,
    emit_sameas_dump,
    link_organizations,
    link_persons,
    local_records_from_dump,
)
from linkedcb.mock_upstream import FixtureCorpus, MockUpstream
from linkedcb.rdf import read_ntriples_file, write_ntriples_file
from linkedcb.upstream import ApiKey, RateGate, UpstreamClient

HERE = Path(__file__).parent
OUT = HERE / "out"
shutil.rmtree(OUT, ignore_errors=True)
OUT.mkdir()

key = ApiKey("demo-key")
corpus = FixtureCorpus.from_directory(HERE / "fixtures", page_size=2)

with MockUpstream(corpus).serve("127.0.0.1:0") as upstream:
    client = UpstreamClient(upstream.url, gate=RateGate(0.02))

    stats = crawl([], key, OUT / "dump.nt.gz", client=client, checkpoint=OUT / "crawl.cp")
    print(f"first crawl: {stats.triples} triples, {stats.entities} entities, {len(upstream.request_log)} requests")

    # link organizations by homepage host and people by name + birth date
    dump = read_ntriples_file(OUT / "dump.nt.gz")
    orgs, people = local_records_from_dump(dump)
    external = read_ntriples_file(HERE / "external.nt")
    report = LinkReport()
    mappings = link_organizations(orgs, HomepageIndex.from_triples(external), report)
    mappings += link_persons(people, PersonIndex.from_triples(external), report)
    write_ntriples_file(OUT / "sameas.nt", emit_sameas_dump(mappings))
    print()
    print(report.render())

    # second crawl folds the links into the dump and the VoID description
    stats = crawl(
        [], key, OUT / "dump.nt.gz", client=client, checkpoint=OUT / "crawl.cp", fresh=True,
        sameas=SameAsStore.from_file(OUT / "sameas.nt"),
        void_path=OUT / "void.nt", stats_path=OUT / "stats.tsv",
    )
    print(f"second crawl: {stats.triples} triples, {stats.sameas_links} sameAs links")
    print()
    print((OUT / "stats.tsv").read_text())
    print((OUT / "void.nt").read_text())
