"""Diversity, cluster-concentration and citation indicators."""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .corpus import Corpus
from .graph import ClusterSummary, CoauthorshipGraph, connected_components

__all__ = [
    "DiversityPoint",
    "ImpactPoint",
    "IntersectionPartition",
    "citation_impact",
    "diversity",
    "entropy_diversity",
    "intersection_categories",
    "n_clusters_50",
    "partition_intersections",
    "self_citation_rate",
    "variance_diversity",
]


def intersection_categories(domains: Sequence[str]) -> list[frozenset[str]]:
    """All domain subsets of size >= 2, by size and then in domain order.

    For ``("RET", "NNM", "EECS")``: RET&NNM, RET&EECS, NNM&EECS, all three.
    """
    return [frozenset(c) for k in range(2, len(domains) + 1) for c in combinations(domains, k)]


def category_label(cat: frozenset[str], domains: Sequence[str]) -> str:
    return "&".join(d for d in domains if d in cat)


@dataclass(frozen=True)
class IntersectionPartition:
    domains: tuple[str, ...]
    categories: tuple[frozenset[str], ...]
    counts: tuple[int, ...]
    window: tuple[int, int] | None = None

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def fractions(self) -> tuple[float, ...]:
        n = self.total
        return tuple(k / n for k in self.counts) if n else tuple(0.0 for _ in self.counts)

    @property
    def labels(self) -> list[str]:
        return [category_label(c, self.domains) for c in self.categories]

    def shares(self) -> dict[str, float]:
        return dict(zip(self.labels, self.fractions))


def partition_intersections(
    bg: CoauthorshipGraph, domains: Sequence[str] | None = None
) -> IntersectionPartition:
    """Share of boundary authors in each exact domain-intersection class.

    An author active in all three domains counts only in the triple class,
    so the fractions sum to one.
    """
    if bg.n == 0:
        raise ValueError("no boundary authors")
    if domains is None:
        domains = sorted(set().union(*(a.domains for a in bg.vertices.values())))
    cats = intersection_categories(domains)
    index = {c: i for i, c in enumerate(cats)}
    counts = [0] * len(cats)
    for v, attrs in bg.vertices.items():
        i = index.get(frozenset(attrs.domains))
        if i is None:
            raise ValueError(f"author {v} has domain labels {sorted(attrs.domains)} outside the categories")
        counts[i] += 1
    return IntersectionPartition(tuple(domains), tuple(cats), tuple(counts), bg.window)


def _fractions(p: IntersectionPartition | Sequence[float]) -> Sequence[float]:
    return p.fractions if isinstance(p, IntersectionPartition) else p


def variance_diversity(p: IntersectionPartition | Sequence[float]) -> float:
    """``1 - sum(p_k ** 2)``; zero when one category holds everyone."""
    return 1.0 - math.fsum(x * x for x in _fractions(p))


def entropy_diversity(p: IntersectionPartition | Sequence[float]) -> float:
    """``sum(p_k * log10(1 / p_k))`` with empty categories contributing 0."""
    return math.fsum(-x * math.log10(x) for x in _fractions(p) if x > 0)


@dataclass(frozen=True)
class DiversityPoint:
    window: tuple[int, int] | None
    V: float
    H: float
    K: int


def diversity(p: IntersectionPartition) -> DiversityPoint:
    return DiversityPoint(p.window, variance_diversity(p), entropy_diversity(p), len(p.categories))


def n_clusters_50(g: CoauthorshipGraph | ClusterSummary) -> int:
    """Fewest of the largest clusters that together hold half of the vertices.

    Half is rounded up for odd vertex counts.
    """
    summary = g if isinstance(g, ClusterSummary) else connected_components(g)
    n = sum(summary.sizes)
    if n == 0:
        raise ValueError("empty graph")
    need = (n + 1) // 2
    running = 0
    for i, size in enumerate(summary.sizes, 1):
        running += size
        if running >= need:
            return i
    raise AssertionError("unreachable")


# -- citation indicators -------------------------------------------------------------

@dataclass(frozen=True)
class ImpactPoint:
    year: int
    CI: float
    CI_rel: float | None = None
    self_citation_rate: float | None = None


def _citations_in(c: Corpus, pub_id: str, year: int) -> int:
    return sum(1 for l in c.citations.get(pub_id, ()) if l.citing_year == year)


def _impact_counts(c: Corpus, ids: Iterable[str], year: int, scope: str) -> tuple[int, int]:
    cites = pubs = 0
    for pub_id in ids:
        p = c[pub_id]
        recent = p.year in (year - 1, year - 2)
        pubs += recent
        if recent or (scope == "all" and p.year <= year):
            cites += _citations_in(c, pub_id, year)
    return cites, pubs


def _category_average(c: Corpus, ids: Iterable[str], year: int, weighting: str, scope: str) -> float:
    # each publication spreads unit weight over its subject categories, so the
    # weighted mean over categories of a set equals that set's own CI
    cites: dict[str, float] = {}
    pubs: dict[str, float] = {}
    for pub_id in ids:
        p = c[pub_id]
        cats = sorted(set(p.subject_categories)) or [""]
        share = 1.0 / len(cats)
        recent = p.year in (year - 1, year - 2)
        n_cites = _citations_in(c, pub_id, year) if recent or (scope == "all" and p.year <= year) else 0
        for cat in cats:
            pubs[cat] = pubs.get(cat, 0.0) + (share if recent else 0.0)
            cites[cat] = cites.get(cat, 0.0) + share * n_cites
    cats = [k for k in sorted(pubs) if pubs[k] > 0]
    if not cats:
        raise ValueError("insufficient publication history")
    if weighting == "weighted":
        total = math.fsum(pubs[k] for k in cats)
        return math.fsum(pubs[k] * (cites[k] / pubs[k]) for k in cats) / total
    if weighting == "unweighted":
        return math.fsum(cites[k] / pubs[k] for k in cats) / len(cats)
    raise ValueError(f"unknown weighting {weighting!r}")


def citation_impact(
    pubs: Iterable[str],
    c: Corpus,
    year: int,
    reference: Iterable[str] | None = None,
    weighting: str = "weighted",
    scope: str = "window",
) -> ImpactPoint:
    """Citations recorded in ``year`` per publication of the two preceding years.

    With the default ``scope="window"`` only citations to publications from
    ``year - 1`` and ``year - 2`` are counted; ``scope="all"`` counts
    citations to any publication of the set up to ``year``.  Self-citations
    are included.  When ``reference`` is given, ``CI_rel`` divides by the
    reference set's mean CI over subject categories, weighted by the
    categories' publication counts (or unweighted).
    """
    ids = sorted(set(pubs))
    cites, n = _impact_counts(c, ids, year, scope)
    if n == 0:
        raise ValueError("insufficient publication history")
    ci = cites / n
    rel = None
    if reference is not None:
        ref = _category_average(c, sorted(set(reference)), year, weighting, scope)
        if ref <= 0:
            raise ValueError("reference citation impact is zero")
        rel = ci / ref
    return ImpactPoint(year, ci, rel)


def self_citation_rate(pubs: Iterable[str], c: Corpus, year: int) -> float:
    """Share of the set's ``year`` publications citing a set publication from
    ``year`` or ``year - 1``.

    This is a temporal self-reference rate of the publication set, not an
    author-level self-citation count.
    """
    ids = set(pubs)
    current = {i for i in ids if c[i].year == year}
    if not current:
        raise ValueError(f"no publications in {year}")
    citing = set()
    for pub_id in sorted(ids):
        if c[pub_id].year in (year, year - 1):
            for link in c.citations.get(pub_id, ()):
                if link.citing_id in current:
                    citing.add(link.citing_id)
    return len(citing) / len(current)
