"""Deterministic synthetic fixture corpora for the test suite."""

import random

FIRST = ["Ada", "Brian", "Chloé", "Dmitri", "Eva", "Farid", "Grace", "Hiro", "Ines", "José"]
LAST = ["Ray", "Müller", "Okafor", "Smith", "Tanaka", "Novák", "O'Neil", "Silva", "Chen", "Berg"]


def _date(rng):
    return f"{rng.randint(1950, 2018):04d}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}"


def make_corpus(n_orgs=6, n_people=8, n_rounds=6, n_categories=3, big_relation=10, seed=7, dangling=False):
    """Return ``{type: {permalink: fixture}}``.

    ``org-0`` carries a ``funding_rounds`` relation with ``big_relation``
    items so relation expansion kicks in for small page sizes.
    """
    rng = random.Random(seed)
    orgs = [f"org-{i}" for i in range(n_orgs)]
    people = [f"person-{i}" for i in range(n_people)]
    rounds = [f"round-{i}" for i in range(max(n_rounds, big_relation))]
    cats = [f"cat-{i}" for i in range(n_categories)]
    ents = {"organizations": {}, "people": {}, "funding-rounds": {}, "categories": {}}

    for i, p in enumerate(orgs):
        props = {
            "name": f"Org {i} \"quoted\"" if i == 1 else f"Org {i}",
            "short_description": "line one\nline two\twith tab" if i == 2 else f"Company number {i}",
            "homepage_url": f"https://www.org{i}.example.com/about",
            "founded_on": _date(rng),
            "founded_on_trust_code": rng.randint(0, 7),
            "role_investor": bool(i % 2),
            "num_employees_min": rng.randint(1, 5000),
            "total_funding_usd": round(rng.uniform(1, 1e6), 2),
            "closed_on": None,
            "stock_symbol": "",
        }
        rels = {
            "founders": [f"people/{x}" for x in rng.sample(people, 2)],
            "categories": [f"categories/{rng.choice(cats)}"],
        }
        if i == 0:
            rels["funding_rounds"] = [f"funding-rounds/{r}" for r in rounds[:big_relation]]
        else:
            rels["funding_rounds"] = [f"funding-rounds/{rounds[i % len(rounds)]}"]
        if dangling and i == 3:
            rels["founders"].append({"api_path": "people/ghost", "dangling": True})
        ents["organizations"][p] = {"properties": props, "relationships": rels}

    for i, p in enumerate(people):
        ents["people"][p] = {
            "properties": {
                "first_name": FIRST[i % len(FIRST)],
                "last_name": LAST[i % len(LAST)],
                "born_on": _date(rng),
                "born_on_trust_code": 7 if i % 3 else rng.randint(0, 6),
                "gender": rng.choice(["Male", "Female"]),
                "role_investor": i % 2 == 0,
            },
            "relationships": {"founded_companies": [f"organizations/{rng.choice(orgs)}"]},
        }

    for i, r in enumerate(rounds):
        ents["funding-rounds"][r] = {
            "properties": {
                "funding_type": rng.choice(["seed", "venture", "angel"]),
                "money_raised_usd": rng.randint(10_000, 10_000_000),
                "announced_on": _date(rng),
                "announced_on_trust_code": rng.choice([1, 4, 5, 6, 7]),
            },
            "relationships": {"funded_organization": [f"organizations/{orgs[i % len(orgs)]}"]},
        }

    for i, c in enumerate(cats):
        ents["categories"][c] = {"properties": {"name": f"Category {i}"}, "relationships": {}}
    return ents


def count_entities(ents):
    return sum(len(v) for v in ents.values())


LOCAL = "http://linked-crunchbase.org/api"
DBR = "http://dbpedia.org/resource/"
FOAF_HOMEPAGE = "http://xmlns.com/foaf/0.1/homepage"
FOAF_NAME = "http://xmlns.com/foaf/0.1/name"
DBO_BIRTH = "http://dbpedia.org/ontology/birthDate"
XSD_DATE = "http://www.w3.org/2001/XMLSchema#date"


def make_link_corpus(n_orgs=20, n_people=20, n_traps=5, n_collisions=3):
    """Labeled linker corpus.

    Returns a dict with local ``orgs`` (iri, homepage), local ``people``
    (iri, name, birth lexical, trust code), the external corpus as N-Triples
    text in ``corpus_nt``, the ``truth`` set of (local, external, method) and
    the local IRIs of the homonym ``traps``.
    """
    lines, orgs, people, truth, traps = [], [], [], set(), []

    def homepage(ext, url):
        lines.append(f"<{DBR}{ext}> <{FOAF_HOMEPAGE}> <{url}> .")

    def person(ext, name, date):
        lines.append(f'<{DBR}{ext}> <{FOAF_NAME}> "{name}"@en .')
        lines.append(f'<{DBR}{ext}> <{DBO_BIRTH}> "{date}"^^<{XSD_DATE}> .')

    for i in range(n_orgs):
        local = f"{LOCAL}/organizations/company-{i}"
        # local and external spell the same host differently
        variants = [f"https://www.Company{i}.com/about?ref=cb", f"http://company{i}.com", f"company{i}.com/"]
        orgs.append((local, variants[i % 3]))
        homepage(f"Company_{i}", f"http://www.company{i}.com/" if i % 2 else f"https://company{i}.com/home")
        truth.add((local, f"{DBR}Company_{i}", "org-fqdn"))
    # a subdomain is a different service and must not match its parent
    orgs.append((f"{LOCAL}/organizations/company-0-blog", "http://blog.company0.com"))
    orgs.append((f"{LOCAL}/organizations/unknown-co", "https://unknown-co.example/"))
    orgs.append((f"{LOCAL}/organizations/no-url", "not a url"))
    for j in range(n_collisions):
        orgs.append((f"{LOCAL}/organizations/shared-{j}", f"https://shared{j}.org/"))
        homepage(f"Shared_{j}_A", f"http://shared{j}.org")
        homepage(f"Shared_{j}_B", f"http://www.shared{j}.org/b")

    for i in range(n_people):
        local = f"{LOCAL}/people/person-{i}"
        date = f"{1950 + i:04d}-{(i % 12) + 1:02d}-{(i % 27) + 1:02d}"
        people.append((local, f"Jösé  Müller{i}", date, 7))
        person(f"Jose_Muller_{i}", f"jose muller{i}", date)
        truth.add((local, f"{DBR}Jose_Muller_{i}", "person-name-dob"))
    for k in range(n_traps):
        local = f"{LOCAL}/people/brian-ray-{k}"
        people.append((local, f"Brian Ray{k}", f"1970-01-{k + 2:02d}", 7))
        person(f"Brian_Ray_{k}", f"Brian Ray{k}", f"1955-11-{k + 8:02d}")
        traps.append(local)
    # imprecise birth dates never take part
    people.append((f"{LOCAL}/people/vague", "Jösé  Müller0", "1950-01-01", 3))
    return {"orgs": orgs, "people": people, "corpus_nt": "\n".join(lines) + "\n", "truth": truth, "traps": traps}
