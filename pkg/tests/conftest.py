import copy

import pytest

from linkedcb.mock_upstream import FixtureCorpus, MockUpstream
from linkedcb.upstream import ApiKey, RateGate, UpstreamClient

from corpus import make_corpus

KEY = "s3cr3t-key-value"


@pytest.fixture
def key():
    return ApiKey(KEY)


@pytest.fixture
def ents():
    return make_corpus()


@pytest.fixture
def serve():
    """Factory: serve(entities, **config) -> running MockUpstream."""
    servers = []

    def start(entities, **config):
        config.setdefault("valid_keys", frozenset({KEY}))
        mock = MockUpstream(FixtureCorpus(copy.deepcopy(entities), **config)).serve("127.0.0.1:0")
        servers.append(mock)
        return mock

    yield start
    for s in servers:
        s.stop()


@pytest.fixture
def make_client():
    def make(mock, interval=0.001, **kw):
        return UpstreamClient(mock.url, gate=RateGate(interval), **kw)

    return make


# -- acceptance summary ---------------------------------------------------------------

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "ok": True, "seen": False})
    entry["seen"] = True
    if report.failed or (report.when == "call" and report.skipped):
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        verdict = "PASS" if entry["ok"] and entry["seen"] else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict}  {entry['title']}")
