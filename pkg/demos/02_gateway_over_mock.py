"""Serve the demo fixtures through the mock upstream and the Linked Data gateway.

The gateway takes the upstream key as HTTP Basic user name (empty password).
Without a key it answers with owl:sameAs links only.

Run:  python demos/02_gateway_over_mock.py
"""

from pathlib import Path

import requests

from linkedcb.gateway import Gateway, GatewayServer
from linkedcb.linker import SameAsStore
from linkedcb.mock_upstream import FixtureCorpus, MockUpstream
from linkedcb.rdf import Iri
from linkedcb.upstream import RateGate, UpstreamClient

HERE = Path(__file__).parent
KEY = "demo-key"

corpus = FixtureCorpus.from_directory(HERE / "fixtures", page_size=2, valid_keys=frozenset({KEY}))
links = SameAsStore([
    (Iri("http://linked-crunchbase.org/api/organizations/facebook"), Iri("http://dbpedia.org/resource/Facebook")),
])

with MockUpstream(corpus).serve("127.0.0.1:0") as upstream:
    client = UpstreamClient(upstream.url, gate=RateGate(0.05))
    with GatewayServer(Gateway(client, links)) as gateway:
        url = f"{gateway.url}/api/organizations/facebook"

        r = requests.get(url, auth=(KEY, ""), headers={"Accept": "text/turtle"})
        print(f"--- {r.status_code} {r.headers['Content-Type']}")
        print(r.text)

        r = requests.get(url, auth=(KEY, ""), headers={"Accept": "application/ld+json"})
        print(f"--- {r.status_code} {r.headers['Content-Type']}")
        print(r.text[:400], "...\n")

        # relation lists are paged; the gateway links to the next page
        r = requests.get(f"{url}/acquisitions", auth=(KEY, ""))
        print(f"--- relation page: {r.status_code}")
        print(r.text)

        before = len(upstream.request_log)
        r = requests.get(url)
        print(f"--- keyless: {r.status_code} {r.headers['Content-Type']}")
        print(r.text)
        print("upstream calls made for the keyless request:", len(upstream.request_log) - before)

        r = requests.get(url, headers={"Accept": "text/html"})
        print(f"--- text/html: {r.status_code}")
