"""Bibliographic records, citation links and the immutable ``Corpus``.

Records are read from JSON lines (one object per line) and citation links
from a three-column CSV file.  See ``docs/formats.md`` for the field tables.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, TextIO

log = logging.getLogger(__name__)

__all__ = [
    "Affiliation",
    "AuthorEntry",
    "CitationLink",
    "CleaningReport",
    "Corpus",
    "IngestReport",
    "PublicationRecord",
    "clean_corpus",
    "ingest_records",
    "is_cited",
    "load_corpus",
    "read_citations",
    "record_from_dict",
    "record_to_dict",
]

DOC_TYPES = ("journal_article", "proceedings_paper")
_COUNTRY_RE = re.compile(r"^[A-Z]{2}$")


@dataclass(frozen=True)
class Affiliation:
    org: str = ""
    region: str = ""
    country: str = ""

    @property
    def is_empty(self) -> bool:
        return not (self.org or self.region or self.country)


@dataclass(frozen=True)
class AuthorEntry:
    raw_name: str
    affiliations: tuple[Affiliation, ...] = ()

    def __post_init__(self):
        if not self.raw_name.strip():
            raise ValueError("author name is empty")
        for aff in self.affiliations:
            if aff.country and not _COUNTRY_RE.match(aff.country):
                raise ValueError(f"country code {aff.country!r} is not uppercase alpha-2")


@dataclass(frozen=True)
class PublicationRecord:
    id: str
    year: int
    doc_type: str
    title: str
    abstract: str = ""
    keywords: tuple[str, ...] = ()
    authors: tuple[AuthorEntry, ...] = ()
    subject_categories: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.id:
            raise ValueError("record id is empty")
        if self.doc_type not in DOC_TYPES:
            raise ValueError(f"unknown document type {self.doc_type!r}")
        if not self.authors:
            raise ValueError("record has no authors")
        if any(not k.strip() for k in self.keywords):
            raise ValueError("empty keyword")

    @property
    def countries(self) -> frozenset[str]:
        return frozenset(a.country for au in self.authors for a in au.affiliations if a.country)


@dataclass(frozen=True)
class CitationLink:
    citing_id: str
    cited_id: str
    citing_year: int


@dataclass
class IngestReport:
    lines: int = 0
    accepted: int = 0
    out_of_period: list[str] = field(default_factory=list)
    errors: list[tuple[int, str]] = field(default_factory=list)
    duplicates: list[str] = field(default_factory=list)
    citation_lines: int = 0
    citations_accepted: int = 0
    citations_out_of_period: int = 0
    citation_errors: list[tuple[int, str]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "lines": self.lines,
            "accepted": self.accepted,
            "out_of_period": sorted(self.out_of_period),
            "duplicates": sorted(self.duplicates),
            "errors": [{"line": n, "message": m} for n, m in self.errors],
            "citations": {
                "lines": self.citation_lines,
                "accepted": self.citations_accepted,
                "out_of_period": self.citations_out_of_period,
                "errors": [{"line": n, "message": m} for n, m in self.citation_errors],
            },
        }


@dataclass
class CleaningReport:
    before: int
    after: int
    removed: list[str]
    citations_removed: int = 0

    def to_dict(self) -> dict:
        return {
            "before": self.before,
            "after": self.after,
            "removed": list(self.removed),
            "citations_removed": self.citations_removed,
        }


class Corpus:
    """Id-indexed records plus an index from cited id to its citation links.

    Both mappings are read-only and kept in sorted key order, so iteration
    (and everything serialized from it) does not depend on input order.
    """

    def __init__(
        self,
        records: Mapping[str, PublicationRecord] | Iterable[PublicationRecord],
        citations: Iterable[CitationLink] = (),
        study_period: tuple[int, int] = (2000, 2015),
    ):
        if isinstance(records, Mapping):
            records = records.values()
        recs = {r.id: r for r in sorted(records, key=lambda r: r.id)}
        index: dict[str, list[CitationLink]] = {}
        for link in citations:
            if link.cited_id not in recs:
                raise ValueError(f"citation to unknown record {link.cited_id!r}")
            index.setdefault(link.cited_id, []).append(link)
        self.records: Mapping[str, PublicationRecord] = MappingProxyType(recs)
        self.citations: Mapping[str, tuple[CitationLink, ...]] = MappingProxyType(
            {
                k: tuple(sorted(v, key=lambda l: (l.citing_year, l.citing_id)))
                for k, v in sorted(index.items())
            }
        )
        self.study_period = (int(study_period[0]), int(study_period[1]))

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[PublicationRecord]:
        return iter(self.records.values())

    def __contains__(self, pub_id: object) -> bool:
        return pub_id in self.records

    def __getitem__(self, pub_id: str) -> PublicationRecord:
        return self.records[pub_id]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return (
            self.study_period == other.study_period
            and dict(self.records) == dict(other.records)
            and dict(self.citations) == dict(other.citations)
        )

    def __repr__(self) -> str:
        return f"Corpus({len(self.records)} records, period={self.study_period})"

    def links(self) -> Iterator[CitationLink]:
        for group in self.citations.values():
            yield from group

    def ids(self) -> frozenset[str]:
        return frozenset(self.records)

    def subset(self, ids: Iterable[str]) -> Corpus:
        keep = set(ids)
        return Corpus(
            [r for r in self.records.values() if r.id in keep],
            [l for l in self.links() if l.cited_id in keep],
            self.study_period,
        )


# -- record (de)serialization ------------------------------------------------

def _as_str(obj: dict, key: str, default: str | None = None) -> str:
    value = obj.get(key, default)
    if value is None:
        raise ValueError(f"missing field {key!r}")
    if not isinstance(value, str):
        raise ValueError(f"field {key!r} must be a string")
    return value


def _as_str_list(obj: dict, key: str) -> tuple[str, ...]:
    value = obj.get(key, [])
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ValueError(f"field {key!r} must be a list of strings")
    return tuple(value)


def _affiliation(obj: dict) -> Affiliation:
    return Affiliation(
        org=(obj.get("org") or "").strip(),
        region=(obj.get("region") or "").strip(),
        country=(obj.get("country") or "").strip(),
    )


def record_from_dict(obj: dict) -> PublicationRecord:
    """Build a record from one parsed line of the JSON-lines format."""
    if not isinstance(obj, dict):
        raise ValueError("record is not an object")
    year = obj.get("year")
    if isinstance(year, bool) or not isinstance(year, int) or not 1000 <= year <= 9999:
        raise ValueError("field 'year' must be a 4-digit integer")
    authors = []
    raw_authors = obj.get("authors")
    if not isinstance(raw_authors, list):
        raise ValueError("field 'authors' must be a list")
    for a in raw_authors:
        if not isinstance(a, dict):
            raise ValueError("author entry is not an object")
        if "affiliations" in a:
            affs = tuple(_affiliation(x) for x in a["affiliations"])
        else:
            affs = (_affiliation(a),)
        affs = tuple(x for x in affs if not x.is_empty)
        authors.append(AuthorEntry(_as_str(a, "name").strip(), affs))
    return PublicationRecord(
        id=_as_str(obj, "id").strip(),
        year=year,
        doc_type=_as_str(obj, "type"),
        title=_as_str(obj, "title", ""),
        abstract=_as_str(obj, "abstract", ""),
        keywords=tuple(k.strip() for k in _as_str_list(obj, "keywords")),
        authors=tuple(authors),
        subject_categories=_as_str_list(obj, "subjects"),
    )


def record_to_dict(rec: PublicationRecord) -> dict:
    authors = []
    for au in rec.authors:
        if len(au.affiliations) == 1:
            a = au.affiliations[0]
            authors.append({"name": au.raw_name, "org": a.org, "region": a.region, "country": a.country})
        else:
            authors.append(
                {
                    "name": au.raw_name,
                    "affiliations": [
                        {"org": a.org, "region": a.region, "country": a.country} for a in au.affiliations
                    ],
                }
            )
    return {
        "id": rec.id,
        "year": rec.year,
        "type": rec.doc_type,
        "title": rec.title,
        "abstract": rec.abstract,
        "keywords": list(rec.keywords),
        "authors": authors,
        "subjects": list(rec.subject_categories),
    }


# -- ingest -----------------------------------------------------------------

def _lines(source: str | Path | TextIO | Iterable[str]) -> Iterator[str]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            yield from fh
    else:
        yield from source


def _iter_citations(
    source: str | Path | TextIO | Iterable[str], report: IngestReport
) -> Iterator[tuple[int, CitationLink]]:
    for lineno, row in enumerate(csv.reader(_lines(source)), 1):
        if not row or not "".join(row).strip():
            continue
        if lineno == 1 and row[0].strip() == "citing_id":
            continue
        report.citation_lines += 1
        if len(row) != 3:
            report.citation_errors.append((lineno, "expected 3 fields"))
            continue
        citing, cited, year = (x.strip() for x in row)
        if not citing or not cited:
            report.citation_errors.append((lineno, "empty id"))
            continue
        if citing == cited:
            report.citation_errors.append((lineno, f"self-referential link {citing}"))
            continue
        if not re.fullmatch(r"\d{4}", year):
            report.citation_errors.append((lineno, "citing_year must be a 4-digit integer"))
            continue
        yield lineno, CitationLink(citing, cited, int(year))


def read_citations(
    source: str | Path | TextIO | Iterable[str], report: IngestReport | None = None
) -> list[CitationLink]:
    """Parse ``citing_id,cited_id,citing_year`` rows; a header row is optional."""
    report = report if report is not None else IngestReport()
    return [link for _, link in _iter_citations(source, report)]


def ingest_records(
    source: str | Path | TextIO | Iterable[str],
    period: tuple[int, int],
    citations: str | Path | TextIO | Iterable[str] | None = None,
) -> tuple[Corpus, IngestReport]:
    """Read JSON-lines records (and optionally citation links) into a Corpus.

    Malformed lines are reported with their line number and skipped.  The
    first occurrence of a duplicate id wins; records outside ``period`` are
    dropped and listed in the report.  Citation links whose citing year
    falls outside the period are kept but counted.
    """
    start, end = period
    if start > end:
        raise ValueError(f"invalid period {period}")
    report = IngestReport()
    parsed: list[tuple[int, PublicationRecord]] = []
    for lineno, line in enumerate(_lines(source), 1):
        if not line.strip():
            continue
        report.lines += 1
        try:
            rec = record_from_dict(json.loads(line))
        except (ValueError, TypeError) as exc:
            report.errors.append((lineno, str(exc)))
            continue
        parsed.append((lineno, rec))

    # first occurrence in file order wins
    by_id: dict[str, list[tuple[int, PublicationRecord]]] = {}
    for lineno, rec in parsed:
        by_id.setdefault(rec.id, []).append((lineno, rec))
    records: list[PublicationRecord] = []
    for pub_id, group in by_id.items():
        if len(group) > 1:
            report.duplicates.append(pub_id)
            for lineno, _ in group[1:]:
                report.errors.append((lineno, f"duplicate id {pub_id}"))
        rec = group[0][1]
        if not start <= rec.year <= end:
            report.out_of_period.append(rec.id)
            continue
        records.append(rec)
    report.accepted = len(records)
    report.errors.sort()

    links: list[CitationLink] = []
    if citations is not None:
        known = {r.id: r.year for r in records}
        for lineno, link in _iter_citations(citations, report):
            if link.cited_id not in known:
                report.citation_errors.append((lineno, f"unresolved cited id {link.cited_id}"))
                continue
            if link.citing_year < known[link.cited_id]:
                report.citation_errors.append((lineno, f"link {link.citing_id}->{link.cited_id} predates cited record"))
                continue
            if not start <= link.citing_year <= end:
                report.citations_out_of_period += 1
            links.append(link)
        links = sorted(set(links), key=lambda l: (l.cited_id, l.citing_year, l.citing_id))
        report.citations_accepted = len(links)
        report.citation_errors.sort()
    if report.errors:
        log.warning("%d malformed or duplicate record lines", len(report.errors))
    return Corpus(records, links, period), report


def load_corpus(records: str | Path, citations: str | Path | None, period: tuple[int, int]) -> Corpus:
    return ingest_records(records, period, citations)[0]


def dump_records(corpus: Corpus, fh: TextIO) -> None:
    for rec in corpus:
        fh.write(json.dumps(record_to_dict(rec), ensure_ascii=False, sort_keys=True) + "\n")


def dump_citations(corpus: Corpus, fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["citing_id", "cited_id", "citing_year"])
    for link in sorted(corpus.links(), key=lambda l: (l.cited_id, l.citing_year, l.citing_id)):
        w.writerow([link.citing_id, link.cited_id, link.citing_year])


# -- cleaning and citation status -------------------------------------------

def clean_corpus(c: Corpus, max_authors: int = 100) -> tuple[Corpus, CleaningReport]:
    """Drop records with more than ``max_authors`` authors and their links."""
    removed = sorted(r.id for r in c if len(r.authors) > max_authors)
    gone = set(removed)
    kept_links = [l for l in c.links() if l.cited_id not in gone and l.citing_id not in gone]
    n_links = sum(len(v) for v in c.citations.values())
    cleaned = Corpus([r for r in c if r.id not in gone], kept_links, c.study_period)
    return cleaned, CleaningReport(len(c), len(cleaned), removed, n_links - len(kept_links))


def is_cited(p: PublicationRecord, c: Corpus) -> bool:
    """True if ``p`` was cited in its publication year or the year after."""
    return any(l.citing_year in (p.year, p.year + 1) for l in c.citations.get(p.id, ()))


def dumps_corpus(corpus: Corpus) -> tuple[str, str]:
    rec_buf, cit_buf = io.StringIO(), io.StringIO()
    dump_records(corpus, rec_buf)
    dump_citations(corpus, cit_buf)
    return rec_buf.getvalue(), cit_buf.getvalue()
