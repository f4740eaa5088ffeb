from __future__ import annotations

from collections import Counter
from importlib import resources
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from spanalyze.corpus import Corpus
from spanalyze.delineation import (
    DomainQuery,
    ExpansionConfig,
    _threshold,
    candidate_keywords,
    expand_query,
    match_publication,
    read_term_file,
    retrieve,
    subject_matches,
)

from conftest import rec

TERMS = Path(str(resources.files("spanalyze") / "terms"))


def test_phrase_match_fields_and_contiguity():
    p = rec("A", 2005, title="Efficient dye-sensitized solar cells", abstract="On cells that are solar.",
            keywords=("Photovoltaic devices",))
    assert match_publication(p, "solar cell")
    assert match_publication(p, "Dye sensitized")
    assert match_publication(p, "photovoltaic device")
    assert not match_publication(p, "cell solar")
    assert not match_publication(p, "")


def test_exclusions_never_match():
    c = Corpus([rec("A", 2005, title="wind power"), rec("B", 2005, title="water splitting")])
    q = DomainQuery.keyword("X", ["wind power", "water"], ["water"])
    assert retrieve(c, q) == {"A"}
    assert q.active_terms == ("wind power",)


def test_subject_hierarchy():
    assert subject_matches("Engineering, Electrical & Electronic", "Engineering")
    assert subject_matches("Engineering", "Engineering")
    assert not subject_matches("Engineering Physics", "Engineering")
    c = Corpus([rec("A", 2005, subjects=("Computer Science, Theory & Methods",)), rec("B", 2005, subjects=("Physics",))])
    assert retrieve(c, DomainQuery.subject_category("E", ["Computer Science"])) == {"A"}


def test_query_validation():
    with pytest.raises(ValueError):
        DomainQuery.keyword("X", [])
    with pytest.raises(ValueError):
        DomainQuery.subject_category("X", [" "])
    with pytest.raises(ValueError):
        DomainQuery("X", ("a",), mode="fuzzy")
    with pytest.raises(ValueError):
        ExpansionConfig(cdf_cutoff=1.0)
    with pytest.raises(ValueError):
        ExpansionConfig(rounds=0)


def test_cdf_threshold_worked_example():
    # counts 10, 5, 3, 1, 1: cumulative shares 0.5, 0.75, 0.9, 0.95, 1.0
    ranked = [("a", 10), ("b", 5), ("c", 3), ("d", 1), ("e", 1)]
    assert _threshold(ranked, 0.8) == 5
    assert _threshold(ranked, 0.95) == 1
    # the first keyword alone exceeds the cutoff: fall back to its count
    assert _threshold(ranked, 0.3) == 10


def test_candidate_keywords_counts_once_per_record():
    c = Corpus([
        rec("A", 2005, keywords=("Solar cells", "solar cell", "TiO2")),
        rec("B", 2005, keywords=("solar cell", "TiO2")),
        rec("C", 2005, keywords=("solar cell", "graphene")),
    ])
    got = candidate_keywords(c, ["A", "B", "C"], ExpansionConfig(cdf_cutoff=0.5))
    assert got == [("solar cell", 3)]
    with pytest.raises(ValueError, match="empty core"):
        candidate_keywords(c, [])


def test_expansion_requires_keyword_mode():
    with pytest.raises(ValueError):
        expand_query(Corpus([]), DomainQuery.subject_category("E", ["Physics"]))


def test_packaged_term_lists():
    ret = read_term_file(TERMS / "ret.txt")
    nnm = read_term_file(TERMS / "nnm.txt")
    assert len(ret) == 34 and len(nnm) == 30
    assert "wind power" in {t.lower() for t in ret}


def test_fixture_domains_match_manifest(clean_fixture, manifest):
    queries = {
        "RET": DomainQuery.keyword("RET", read_term_file(TERMS / "ret.txt"), read_term_file(TERMS / "ret_exclusions.txt")),
        "NNM": DomainQuery.keyword("NNM", read_term_file(TERMS / "nnm.txt"), read_term_file(TERMS / "nnm_exclusions.txt")),
        "EECS": DomainQuery.subject_category("EECS", read_term_file(TERMS / "eecs.txt")),
    }
    for name, q in queries.items():
        assert sorted(retrieve(clean_fixture, q)) == manifest["domains"][name], name


# -- properties ---------------------------------------------------------------

VOCAB = ["solar cell", "wind power", "fuel cell", "thin film", "graphene", "battery", "nanowire"]
small_records = st.lists(
    st.tuples(st.lists(st.sampled_from(VOCAB), max_size=3, unique=True), st.sampled_from(VOCAB + ["", "x y"])),
    min_size=1, max_size=25,
)


def _corpus(spec) -> Corpus:
    return Corpus([rec(f"P{i:02d}", 2005, title=title, keywords=tuple(kws)) for i, (kws, title) in enumerate(spec)])


@settings(max_examples=80, deadline=None)
@given(small_records, st.lists(st.sampled_from(VOCAB), min_size=1, unique=True), st.sampled_from(VOCAB))
def test_retrieval_is_monotone_in_terms(spec, terms, extra):
    c = _corpus(spec)
    base = retrieve(c, DomainQuery.keyword("X", terms))
    assert base <= retrieve(c, DomainQuery.keyword("X", terms + [extra]))
    assert retrieve(c, DomainQuery.keyword("X", terms, [extra])) <= base


@settings(max_examples=80, deadline=None)
@given(small_records, st.sampled_from(VOCAB), st.floats(0.05, 0.95), st.integers(1, 3))
def test_expansion_only_grows(spec, seed, cutoff, rounds):
    c = _corpus(spec)
    q = DomainQuery.keyword("X", [seed])
    if not retrieve(c, q):
        return
    expanded, trace = expand_query(c, q, ExpansionConfig(cutoff, 3, rounds))
    assert list(expanded.terms[:1]) == [seed]
    assert retrieve(c, q) <= retrieve(c, expanded)
    assert len(trace.rounds) <= rounds
    assert Counter(trace.final_terms) == Counter(set(trace.final_terms))


def test_plural_overrides_apply_inside_context():
    from spanalyze.delineation import using_normalizer
    from spanalyze.text import Normalizer

    c = Corpus([rec("A", 2005, title="Imaging of live mice")])
    with using_normalizer(Normalizer({"mice": "mouse"})):
        assert retrieve(c, DomainQuery.keyword("X", ["mouse"])) == {"A"}
    assert retrieve(c, DomainQuery.keyword("X", ["mouse"])) == frozenset()
