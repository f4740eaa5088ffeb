from __future__ import annotations

import json
from pathlib import Path

import pytest

from spanalyze.corpus import AuthorEntry, Affiliation, Corpus, PublicationRecord, clean_corpus, ingest_records
from spanalyze.graph import CoauthorshipGraph, Vertex

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"


def rec(pub_id, year, authors=("A, X.",), title="", abstract="", keywords=(), subjects=(), countries=None):
    """Small record factory; ``countries`` gives one country per author."""
    countries = countries or ["GR"] * len(authors)
    return PublicationRecord(
        id=pub_id, year=year, doc_type="journal_article", title=title, abstract=abstract,
        keywords=tuple(keywords),
        authors=tuple(AuthorEntry(a, (Affiliation("", "", c),)) for a, c in zip(authors, countries)),
        subject_categories=tuple(subjects),
    )


def graph(edges, name="", domains=None, window=None, min_copubs=1):
    """Graph from ``{(a, b): w}`` or an iterable of pairs (weight 1)."""
    if not isinstance(edges, dict):
        edges = {tuple(sorted(e)): 1 for e in edges}
    verts = {v for e in edges for v in e}
    domains = domains or {}
    vertices = {v: Vertex(frozenset(domains.get(v, {name} if name else set()))) for v in verts}
    return CoauthorshipGraph(vertices, {tuple(sorted(e)): w for e, w in edges.items()}, name, window, min_copubs)


@pytest.fixture(scope="session")
def manifest():
    return json.loads((FIXTURES / "manifest.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def fixture_corpus() -> Corpus:
    corpus, report = ingest_records(FIXTURES / "corpus_small.jsonl", (2000, 2015), FIXTURES / "citations_small.csv")
    assert not report.errors and not report.citation_errors
    return corpus


@pytest.fixture(scope="session")
def clean_fixture(fixture_corpus) -> Corpus:
    return clean_corpus(fixture_corpus)[0]


# -- acceptance summary ---------------------------------------------------------
# Tests marked ``acceptance(n, label)`` are reported one line per criterion
# at the end of the run, whatever the verbosity.

_ACCEPTANCE: dict[int, tuple[str, list[bool]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n, label): acceptance criterion n")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    mark = getattr(report, "acceptance", None)
    if mark is None:
        return
    n, label = mark
    _ACCEPTANCE.setdefault(n, (label, []))[1].append(report.passed)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        outcome.get_result().acceptance = tuple(marker.args)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        label, results = _ACCEPTANCE[n]
        status = "PASS" if results and all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {status}  {label}")
