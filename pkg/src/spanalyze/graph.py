"""Weighted coauthorship graphs and the measures computed on them."""
from __future__ import annotations

import os
import unicodedata
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Corpus, PublicationRecord, is_cited
from .taxonomy import is_international

__all__ = [
    "AliasTable",
    "ClusterSummary",
    "CoauthorshipFilters",
    "CoauthorshipGraph",
    "Vertex",
    "author_key",
    "avg_collaborators",
    "betweenness",
    "boundary_from_combined",
    "boundary_spanning",
    "build_coauthorship",
    "connected_components",
    "density",
    "intersect",
]

Edge = tuple[str, str]


# -- author keys ---------------------------------------------------------------

def _ascii_fold(text: str) -> str:
    decomposed = unicodedata.normalize("NFKD", text)
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch)).lower()


def _split_name(raw: str) -> tuple[str, list[str]]:
    raw = raw.strip()
    if "," in raw:
        surname, given = raw.split(",", 1)
        return surname, given.replace(".", " ").replace("-", " ").split()
    parts = raw.replace(".", ". ").split()
    if len(parts) == 1:
        return parts[0], []
    return parts[-1], " ".join(parts[:-1]).replace(".", " ").replace("-", " ").split()


def author_key(raw_name: str, aliases: AliasTable | None = None) -> str:
    """Canonical author key: folded surname plus given-name initials.

    ``"Papadopoulos, Georgios A."`` and ``"G. A. Papadopoulos"`` both map
    to ``"papadopoulos_ga"``.  An alias table, when given, is consulted
    first.
    """
    if aliases is not None:
        hit = aliases.get(raw_name)
        if hit is not None:
            return hit
    surname, given = _split_name(raw_name)
    sur = "".join(ch for ch in _ascii_fold(surname) if ch.isalnum())
    initials = "".join(_ascii_fold(g)[0] for g in given if _ascii_fold(g)[:1].isalnum())
    if not sur:
        raise ValueError(f"cannot derive an author key from {raw_name!r}")
    return f"{sur}_{initials}" if initials else sur


class AliasTable:
    """Raw author name -> key overrides, read from ``raw name|key`` lines."""

    def __init__(self, mapping: Mapping[str, str] | None = None):
        self._map = {self._norm(k): v for k, v in (mapping or {}).items()}

    @staticmethod
    def _norm(name: str) -> str:
        return " ".join(_ascii_fold(name).split())

    def get(self, raw_name: str) -> str | None:
        return self._map.get(self._norm(raw_name))

    def __len__(self) -> int:
        return len(self._map)

    @classmethod
    def load(cls, path: str | Path) -> AliasTable:
        mapping = {}
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line.count("|") != 1:
                raise ValueError(f"{path}:{lineno}: expected 'raw name|key'")
            raw, key = (x.strip() for x in line.split("|"))
            mapping[raw] = key
        return cls(mapping)


# -- graph type ----------------------------------------------------------------

@dataclass(frozen=True)
class Vertex:
    domains: frozenset[str] = frozenset()
    pubs: frozenset[str] = frozenset()


def _edge(a: str, b: str) -> Edge:
    return (a, b) if a < b else (b, a)


@dataclass
class CoauthorshipGraph:
    """Undirected graph keyed by author; edge weight = copublication count.

    Edges are stored once, as ``(a, b)`` with ``a < b``.
    """

    vertices: dict[str, Vertex] = field(default_factory=dict)
    edges: dict[Edge, int] = field(default_factory=dict)
    name: str = ""
    window: tuple[int, int] | None = None
    min_copubs: int = 1

    def __post_init__(self):
        self.vertices = dict(sorted(self.vertices.items()))
        edges = {}
        for (a, b), w in self.edges.items():
            if a == b:
                raise ValueError(f"self-loop on {a}")
            if a not in self.vertices or b not in self.vertices:
                raise ValueError(f"edge ({a}, {b}) has an endpoint outside the vertex set")
            edges[_edge(a, b)] = int(w)
        self.edges = dict(sorted(edges.items()))
        self._adj: dict[str, list[str]] | None = None

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.edges)

    def adjacency(self) -> dict[str, list[str]]:
        if self._adj is None:
            adj: dict[str, list[str]] = {v: [] for v in self.vertices}
            for a, b in self.edges:
                adj[a].append(b)
                adj[b].append(a)
            self._adj = {v: sorted(ns) for v, ns in adj.items()}
        return self._adj

    def weight(self, a: str, b: str) -> int:
        return self.edges.get(_edge(a, b), 0)

    def has_edge(self, a: str, b: str) -> bool:
        return _edge(a, b) in self.edges

    def restrict(self, keep: Iterable[str]) -> CoauthorshipGraph:
        keep = set(keep)
        return CoauthorshipGraph(
            {v: a for v, a in self.vertices.items() if v in keep},
            {e: w for e, w in self.edges.items() if e[0] in keep and e[1] in keep},
            self.name,
            self.window,
            self.min_copubs,
        )

    def same_structure(self, other: CoauthorshipGraph) -> bool:
        """Same vertex keys, domain labels, edges and weights."""
        return (
            {v: a.domains for v, a in self.vertices.items()} == {v: a.domains for v, a in other.vertices.items()}
            and self.edges == other.edges
        )

    def __repr__(self) -> str:
        return f"CoauthorshipGraph({self.name!r}, n={self.n}, m={self.m}, window={self.window})"


@dataclass(frozen=True)
class CoauthorshipFilters:
    require_international: bool = False
    require_cited: bool = False
    home_country: str = "GR"

    def accept(self, p: PublicationRecord, c: Corpus) -> bool:
        if self.require_international and not is_international(p, self.home_country):
            return False
        if self.require_cited and not is_cited(p, c):
            return False
        return True


def _pub_keys(p: PublicationRecord, aliases: AliasTable | None) -> list[str]:
    return sorted({author_key(a.raw_name, aliases) for a in p.authors})


def build_coauthorship(
    pubs: Iterable[str],
    c: Corpus,
    window: tuple[int, int],
    min_copubs: int = 2,
    filters: CoauthorshipFilters = CoauthorshipFilters(),
    domains: Mapping[str, Iterable[str]] | None = None,
    aliases: AliasTable | None = None,
    name: str = "",
) -> CoauthorshipGraph:
    """Coauthorship graph of the publications of ``pubs`` inside ``window``.

    Every publication adds 1 to the weight of each pair of its authors.
    Pairs below ``min_copubs`` are dropped, then isolated authors.  Each
    remaining author is labeled with the ``domains`` whose publication sets
    share a publication with the author (``name`` when no domains are given).
    """
    lo, hi = window
    p_lo, p_hi = c.study_period
    if lo > hi or lo < p_lo or hi > p_hi:
        raise ValueError(f"window {lo}-{hi} outside study period {p_lo}-{p_hi}")
    if min_copubs < 1:
        raise ValueError("min_copubs must be >= 1")
    selected = []
    for pub_id in sorted(set(pubs)):
        p = c[pub_id]
        if lo <= p.year <= hi and filters.accept(p, c):
            selected.append(p)
    weights: dict[Edge, int] = {}
    author_pubs: dict[str, set[str]] = {}
    for p in selected:
        keys = _pub_keys(p, aliases)
        for k in keys:
            author_pubs.setdefault(k, set()).add(p.id)
        for a, b in combinations(keys, 2):
            weights[(a, b)] = weights.get((a, b), 0) + 1
    edges = {e: w for e, w in weights.items() if w >= min_copubs}
    linked = {v for e in edges for v in e}
    domain_sets = {d: frozenset(ids) for d, ids in (domains or {}).items()}
    vertices = {}
    for v in sorted(linked):
        vp = frozenset(author_pubs[v])
        if domain_sets:
            labels = frozenset(d for d, ids in domain_sets.items() if vp & ids)
        else:
            labels = frozenset({name}) if name else frozenset()
        vertices[v] = Vertex(labels, vp)
    return CoauthorshipGraph(vertices, edges, name, (lo, hi), min_copubs)


# -- descriptors -----------------------------------------------------------------

def density(g: CoauthorshipGraph) -> float:
    """``2m / (n(n-1))``; 0 for an edgeless graph, 1 for a complete one."""
    return density_nm(g.n, g.m)


def density_nm(n: int, m: int) -> float:
    if n < 2:
        raise ValueError("density undefined for fewer than 2 vertices")
    return 2.0 * m / (n * (n - 1))


def avg_collaborators(g: CoauthorshipGraph) -> float:
    """Mean degree ``2m / n``."""
    return avg_collaborators_nm(g.n, g.m)


def avg_collaborators_nm(n: int, m: int) -> float:
    if n < 1:
        raise ValueError("average degree undefined for an empty graph")
    return 2.0 * m / n


def _dependencies(adj: Mapping[str, Sequence[str]], s: str) -> dict[str, float]:
    # single-source Brandes: BFS path counts, then reverse-order accumulation
    sigma = {s: 1}
    dist = {s: 0}
    preds: dict[str, list[str]] = {s: []}
    order = []
    queue = deque([s])
    while queue:
        v = queue.popleft()
        order.append(v)
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                sigma[w] = 0
                preds[w] = []
                queue.append(w)
            if dist[w] == dist[v] + 1:
                sigma[w] += sigma[v]
                preds[w].append(v)
    delta = dict.fromkeys(order, 0.0)
    for w in reversed(order):
        coeff = (1.0 + delta[w]) / sigma[w]
        for v in preds[w]:
            delta[v] += sigma[v] * coeff
    delta[s] = 0.0
    return delta


def _thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("SPANALYZE_THREADS", "1")))
    except ValueError:
        return 1


def betweenness(g: CoauthorshipGraph, workers: int | None = None) -> dict[str, float]:
    """Unnormalized shortest-path betweenness on the unweighted graph.

    ``c(v)`` sums, over unordered pairs ``{i, j}`` not containing ``v``, the
    fraction of shortest ``i``-``j`` paths through ``v``.  Pairs in different
    components contribute nothing.  Runs in O(nm).  Per-source partial
    sums are added in vertex order, so the result does not depend on
    ``workers`` (capped by ``SPANALYZE_THREADS``).
    """
    adj = g.adjacency()
    sources = list(adj)
    workers = min(workers or 1, _thread_cap()) if workers else 1
    if workers > 1 and len(sources) > 64:
        with ThreadPoolExecutor(workers) as pool:
            partials = list(pool.map(lambda s: _dependencies(adj, s), sources))
    else:
        partials = [_dependencies(adj, s) for s in sources]
    total = dict.fromkeys(sources, 0.0)
    for part in partials:
        for v, d in part.items():
            total[v] += d
    # every unordered pair was counted from both endpoints
    return {v: x / 2.0 for v, x in total.items()}


# -- combining graphs --------------------------------------------------------------

def intersect(g1: CoauthorshipGraph, g2: CoauthorshipGraph) -> CoauthorshipGraph:
    """Common vertices and common edges; edge weight is the smaller weight."""
    common = g1.vertices.keys() & g2.vertices.keys()
    vertices = {
        v: Vertex(g1.vertices[v].domains | g2.vertices[v].domains, g1.vertices[v].pubs | g2.vertices[v].pubs)
        for v in common
    }
    edges = {e: min(w, g2.edges[e]) for e, w in g1.edges.items() if e in g2.edges}
    window = g1.window if g1.window == g2.window else None
    names = "&".join(sorted({g1.name, g2.name} - {""}))
    return CoauthorshipGraph(vertices, edges, names, window, max(g1.min_copubs, g2.min_copubs))


def boundary_spanning(domain_graphs: Sequence[CoauthorshipGraph], name: str = "boundary") -> CoauthorshipGraph:
    """Authors present in two or more of the per-domain graphs.

    Each input graph is labeled by its ``name``.  The result keeps every
    per-domain edge whose endpoints are both boundary authors, with the
    largest weight seen across domains, and labels each author with the
    full set of domains they appear in.
    """
    if len(domain_graphs) < 2:
        raise ValueError("boundary-spanning network needs at least 2 domain graphs")
    names = [g.name for g in domain_graphs]
    if any(not n for n in names) or len(set(names)) != len(names):
        raise ValueError("domain graphs need distinct non-empty names")
    seen: dict[str, set[str]] = {}
    pubs: dict[str, set[str]] = {}
    for g in domain_graphs:
        for v, attrs in g.vertices.items():
            seen.setdefault(v, set()).add(g.name)
            pubs.setdefault(v, set()).update(attrs.pubs)
    keep = {v for v, labels in seen.items() if len(labels) >= 2}
    edges: dict[Edge, int] = {}
    for g in domain_graphs:
        for (a, b), w in g.edges.items():
            if a in keep and b in keep:
                edges[(a, b)] = max(w, edges.get((a, b), 0))
    vertices = {v: Vertex(frozenset(seen[v]), frozenset(pubs[v])) for v in keep}
    windows = {g.window for g in domain_graphs}
    window = windows.pop() if len(windows) == 1 else None
    return CoauthorshipGraph(vertices, edges, name, window, min(g.min_copubs for g in domain_graphs))


def boundary_from_combined(
    domains: Mapping[str, Iterable[str]],
    c: Corpus,
    window: tuple[int, int],
    min_copubs: int = 2,
    filters: CoauthorshipFilters = CoauthorshipFilters(),
    aliases: AliasTable | None = None,
    name: str = "boundary",
) -> CoauthorshipGraph:
    """Boundary network with copublications counted over the union of domains.

    The coauthorship graph of all domain publications is built once; authors
    whose publications fall in two or more domains are kept, with the edges
    among them.
    """
    domain_sets = {d: frozenset(ids) for d, ids in domains.items()}
    if len(domain_sets) < 2:
        raise ValueError("boundary-spanning network needs at least 2 domains")
    union = frozenset().union(*domain_sets.values())
    g = build_coauthorship(union, c, window, min_copubs, filters, domain_sets, aliases, name)
    out = g.restrict(v for v, a in g.vertices.items() if len(a.domains) >= 2)
    return out


@dataclass(frozen=True)
class ClusterSummary:
    clusters: tuple[tuple[str, ...], ...]

    @property
    def sizes(self) -> list[int]:
        return [len(c) for c in self.clusters]

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    @property
    def max_size(self) -> int:
        return len(self.clusters[0]) if self.clusters else 0


def connected_components(g: CoauthorshipGraph) -> ClusterSummary:
    """Components ordered by size (descending), then by smallest member key."""
    adj = g.adjacency()
    seen: set[str] = set()
    comps = []
    for s in adj:
        if s in seen:
            continue
        seen.add(s)
        comp = [s]
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    comp.append(w)
                    queue.append(w)
        comps.append(tuple(sorted(comp)))
    comps.sort(key=lambda c: (-len(c), c[0]))
    return ClusterSummary(tuple(comps))
