"""Domain delineation: boolean phrase retrieval and keyword query expansion."""
from __future__ import annotations

import json
from collections import Counter
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .corpus import Corpus, PublicationRecord
from .text import Normalizer

__all__ = [
    "DomainQuery",
    "ExpansionConfig",
    "ExpansionRound",
    "ExpansionTrace",
    "candidate_keywords",
    "expand_query",
    "keyword_counts",
    "keyword_match",
    "match_publication",
    "read_term_file",
    "retrieve",
    "subject_matches",
    "using_normalizer",
]

_ACTIVE: ContextVar[Normalizer] = ContextVar("spanalyze_normalizer", default=Normalizer())


@contextmanager
def using_normalizer(normalizer: Normalizer) -> Iterator[Normalizer]:
    """Normalize queries and records with ``normalizer`` (e.g. one built
    with plural overrides) inside the ``with`` block."""
    token = _ACTIVE.set(normalizer)
    try:
        yield normalizer
    finally:
        _ACTIVE.reset(token)


def _phrase(text: str) -> str:
    return _ACTIVE.get().phrase(text)


def _tokens(text: str) -> tuple[str, ...]:
    return _ACTIVE.get().tokens(text)


@dataclass(frozen=True)
class DomainQuery:
    """A named S&T domain, either a keyword query or a subject-category filter.

    Terms and exclusions are stored as normalized phrases (space-joined
    tokens), so ``"Solar cells"`` and ``"solar cell"`` are the same term.
    """

    name: str
    seed_terms: tuple[str, ...] = ()
    exclusions: tuple[str, ...] = ()
    mode: str = "keyword"
    subjects: tuple[str, ...] = ()
    terms: tuple[str, ...] = ()

    def __post_init__(self):
        if self.mode not in ("keyword", "subject_category"):
            raise ValueError(f"unknown query mode {self.mode!r}")
        norm = lambda xs: tuple(dict.fromkeys(p for p in (_phrase(x) for x in xs) if p))
        object.__setattr__(self, "seed_terms", norm(self.seed_terms))
        object.__setattr__(self, "exclusions", norm(self.exclusions))
        object.__setattr__(self, "terms", norm(self.terms or self.seed_terms))
        object.__setattr__(self, "subjects", tuple(dict.fromkeys(s.strip() for s in self.subjects if s.strip())))
        if self.mode == "keyword" and not self.seed_terms:
            raise ValueError(f"domain {self.name}: keyword query needs at least one seed term")
        if self.mode == "subject_category" and not self.subjects:
            raise ValueError(f"domain {self.name}: subject query needs at least one subject")

    @classmethod
    def keyword(cls, name: str, terms: Iterable[str], exclusions: Iterable[str] = ()) -> DomainQuery:
        return cls(name, tuple(terms), tuple(exclusions))

    @classmethod
    def subject_category(cls, name: str, subjects: Iterable[str]) -> DomainQuery:
        return cls(name, mode="subject_category", subjects=tuple(subjects))

    @property
    def active_terms(self) -> tuple[str, ...]:
        excluded = set(self.exclusions)
        return tuple(t for t in self.terms if t not in excluded)

    def with_terms(self, terms: Sequence[str]) -> DomainQuery:
        return replace(self, terms=tuple(terms))


@dataclass(frozen=True)
class ExpansionConfig:
    cdf_cutoff: float = 0.05
    top_k_frequent: int = 20
    rounds: int = 1

    def __post_init__(self):
        if not 0.0 < self.cdf_cutoff < 1.0:
            raise ValueError("cdf_cutoff must lie in (0, 1)")
        if self.top_k_frequent < 1:
            raise ValueError("top_k_frequent must be >= 1")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")


@dataclass
class ExpansionRound:
    round: int
    core_size: int
    threshold: int
    candidates: list[tuple[str, int]] = field(default_factory=list)
    accepted: list[tuple[str, int, str]] = field(default_factory=list)
    rejected: list[tuple[str, int, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "round": self.round,
            "core_size": self.core_size,
            "threshold": self.threshold,
            "candidates": [{"keyword": k, "count": n} for k, n in self.candidates],
            "accepted": [{"keyword": k, "count": n, "justified_by": s} for k, n, s in self.accepted],
            "rejected": [{"keyword": k, "count": n, "reason": r} for k, n, r in self.rejected],
        }


@dataclass
class ExpansionTrace:
    domain: str
    seed_terms: list[str]
    config: ExpansionConfig
    rounds: list[ExpansionRound] = field(default_factory=list)
    final_terms: list[str] = field(default_factory=list)

    @property
    def accepted(self) -> list[str]:
        return [k for r in self.rounds for k, _, _ in r.accepted]

    def to_dict(self) -> dict:
        return {
            "domain": self.domain,
            "seed_terms": list(self.seed_terms),
            "config": {
                "cdf_cutoff": self.config.cdf_cutoff,
                "top_k_frequent": self.config.top_k_frequent,
                "rounds": self.config.rounds,
            },
            "rounds": [r.to_dict() for r in self.rounds],
            "final_terms": list(self.final_terms),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


# -- matching -----------------------------------------------------------------

def _contains(hay: tuple[str, ...], needle: tuple[str, ...]) -> bool:
    n = len(needle)
    if n == 0 or n > len(hay):
        return False
    first = needle[0]
    for i in range(len(hay) - n + 1):
        if hay[i] == first and hay[i : i + n] == needle:
            return True
    return False


def keyword_match(p: PublicationRecord, term: str) -> bool:
    """True if ``term`` equals or occurs within one of the record's keywords."""
    needle = _tokens(term)
    return any(_contains(_tokens(k), needle) for k in p.keywords)


def match_publication(p: PublicationRecord, term: str) -> bool:
    """Contiguous phrase match against title, abstract or any keyword.

    The three fields carry equal weight: a hit in any one of them is a match.
    Text outside these fields (venue, references) is never searched.
    """
    needle = _tokens(term)
    if not needle:
        return False
    return (
        _contains(_tokens(p.title), needle)
        or _contains(_tokens(p.abstract), needle)
        or any(_contains(_tokens(k), needle) for k in p.keywords)
    )


def subject_matches(label: str, subject: str) -> bool:
    """Exact label match, or ``label`` is a subcategory ``"<subject>, ..."``."""
    return label == subject or label.startswith(subject + ", ")


def retrieve(c: Corpus, q: DomainQuery) -> frozenset[str]:
    """Ids of the records selected by ``q``.

    Keyword mode returns the union of single-term retrievals over the
    query's terms; a term listed among the exclusions never produces a hit.
    """
    if q.mode == "subject_category":
        return frozenset(
            r.id
            for r in c
            if any(subject_matches(label, s) for label in r.subject_categories for s in q.subjects)
        )
    hits: set[str] = set()
    for term in q.active_terms:
        hits.update(r.id for r in c if r.id not in hits and match_publication(r, term))
    return frozenset(hits)


# -- expansion ----------------------------------------------------------------

def keyword_counts(c: Corpus, ids: Iterable[str]) -> Counter[str]:
    """Occurrences of each normalized keyword, counted once per record."""
    counts: Counter[str] = Counter()
    for pub_id in ids:
        counts.update({p for p in (_phrase(k) for k in c[pub_id].keywords) if p})
    return counts


def _ranked(counts: Counter[str]) -> list[tuple[str, int]]:
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))


def _threshold(ranked: Sequence[tuple[str, int]], cutoff: float) -> int:
    total = sum(n for _, n in ranked)
    # scan from the top; falls back to the top count if even the first
    # keyword's cumulative share exceeds the cutoff
    threshold = ranked[0][1]
    running = 0
    for _, n in ranked:
        running += n
        if running / total <= cutoff:
            threshold = n
        else:
            break
    return threshold


def candidate_keywords(
    c: Corpus, core: Iterable[str], cfg: ExpansionConfig = ExpansionConfig()
) -> list[tuple[str, int]]:
    """Rank the keywords of ``core`` and drop the low-count tail.

    Keywords are sorted by descending count (ties lexicographic).  Scanning
    from the top, the threshold is the count of the last keyword whose
    cumulative count share is still ``<= cfg.cdf_cutoff``; keywords with a
    count strictly below the threshold are discarded.

    With counts ``[10, 5, 3, 1, 1]`` (total 20) the cumulative shares are
    0.5, 0.75, 0.9, 0.95, 1.0; a cutoff of 0.8 puts the threshold at 5 and
    keeps the first two keywords.
    """
    core = list(core)
    if not core:
        raise ValueError("empty core set")
    ranked = _ranked(keyword_counts(c, core))
    if not ranked:
        return []
    threshold = _threshold(ranked, cfg.cdf_cutoff)
    return [(k, n) for k, n in ranked if n >= threshold]


def _records_with_keyword(c: Corpus, keyword: str) -> list[str]:
    return [r.id for r in c if keyword_match(r, keyword)]


def expand_query(
    c: Corpus, q: DomainQuery, cfg: ExpansionConfig = ExpansionConfig()
) -> tuple[DomainQuery, ExpansionTrace]:
    """Grow the term set of a keyword query from co-occurring keywords.

    Each round retrieves the core set with the current terms and ranks its
    keywords (``candidate_keywords``).  A candidate ``w`` is admitted when
    one of the reference terms is among the ``top_k_frequent`` keywords of
    the records carrying ``w``.  The reference terms are the seed terms in
    the first round and the round-start term set afterwards.  Excluded
    phrases are always rejected.  Stops after ``cfg.rounds`` rounds or at
    the first round without additions.
    """
    if q.mode != "keyword":
        raise ValueError("query expansion needs a keyword-mode query")
    excluded = set(q.exclusions)
    terms = list(q.active_terms)
    trace = ExpansionTrace(q.name, list(q.seed_terms), cfg)
    for rnd in range(1, cfg.rounds + 1):
        current = q.with_terms(terms)
        core = sorted(retrieve(c, current))
        if not core:
            raise ValueError("empty core set")
        ranked = _ranked(keyword_counts(c, core))
        threshold = _threshold(ranked, cfg.cdf_cutoff) if ranked else 0
        reference = list(q.seed_terms) if rnd == 1 else list(terms)
        ref_set = set(reference)
        step = ExpansionRound(rnd, len(core), threshold)
        known = set(terms)
        added: list[str] = []
        for kw, n in ranked:
            if n < threshold or kw in known:
                continue
            step.candidates.append((kw, n))
            if kw in excluded:
                step.rejected.append((kw, n, "excluded"))
                continue
            s_w = _records_with_keyword(c, kw)
            top = [k for k, _ in _ranked(keyword_counts(c, s_w))[: cfg.top_k_frequent]]
            hit = next((k for k in top if k in ref_set), None)
            if hit is None:
                step.rejected.append((kw, n, "no reference term among top keywords"))
            else:
                step.accepted.append((kw, n, hit))
                added.append(kw)
        trace.rounds.append(step)
        terms.extend(added)
        if not added:
            break
    trace.final_terms = list(terms)
    return q.with_terms(terms), trace


def read_term_file(path: str | Path) -> list[str]:
    """One phrase per line; ``#`` starts a comment, blank lines are skipped."""
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out
