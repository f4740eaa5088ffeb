from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from spanalyze.corpus import CitationLink, Corpus
from spanalyze.graph import (
    AliasTable,
    CoauthorshipFilters,
    CoauthorshipGraph,
    Vertex,
    author_key,
    avg_collaborators,
    betweenness,
    boundary_from_combined,
    boundary_spanning,
    build_coauthorship,
    connected_components,
    density,
    density_nm,
)

from conftest import FIXTURES, graph, rec


@pytest.mark.parametrize("raw,key", [
    ("Papadopoulos, Georgios A.", "papadopoulos_ga"),
    ("G. A. Papadopoulos", "papadopoulos_ga"),
    ("Müller, E.", "muller_e"),
    ("Nikolić, Jean-Pierre", "nikolic_jp"),
    ("Plato", "plato"),
])
def test_author_key(raw, key):
    assert author_key(raw) == key


def test_author_key_rejects_empty_surname():
    with pytest.raises(ValueError):
        author_key("..., A.")


def test_alias_table(tmp_path):
    path = tmp_path / "aliases.txt"
    path.write_text("# raw|key\nPapadopoulou,  G.|papadopoulos_g\n", encoding="utf-8")
    aliases = AliasTable.load(path)
    assert author_key("papadopoulou, g.", aliases) == "papadopoulos_g"
    assert author_key("Other, X.", aliases) == "other_x"
    path.write_text("no separator\n", encoding="utf-8")
    with pytest.raises(ValueError):
        AliasTable.load(path)


def test_graph_validation():
    with pytest.raises(ValueError, match="self-loop"):
        CoauthorshipGraph({"a": Vertex()}, {("a", "a"): 1})
    with pytest.raises(ValueError, match="outside"):
        CoauthorshipGraph({"a": Vertex()}, {("a", "b"): 1})
    g = CoauthorshipGraph({"b": Vertex(), "a": Vertex()}, {("b", "a"): 2})
    assert list(g.edges) == [("a", "b")] and g.weight("b", "a") == 2


def _team_corpus():
    trio = ("Alpha, A.", "Beta, B.", "Gamma, G.")
    return Corpus([
        rec("P1", 2005, trio, countries=["DE", "GR", "GR"]),
        rec("P2", 2006, trio, countries=["DE", "GR", "GR"]),
        rec("P3", 2006, trio[:2], countries=["GR", "GR"]),
        rec("P4", 2012, trio[1:], countries=["DE", "GR"]),
    ], [CitationLink("X", "P1", 2005), CitationLink("X", "P2", 2008), CitationLink("X", "P3", 2006)])


def test_build_weights_threshold_and_window():
    c = _team_corpus()
    g = build_coauthorship(c.ids(), c, (2000, 2010), min_copubs=2)
    assert g.edges == {("alpha_a", "beta_b"): 3, ("alpha_a", "gamma_g"): 2, ("beta_b", "gamma_g"): 2}
    g3 = build_coauthorship(c.ids(), c, (2000, 2010), min_copubs=3)
    assert g3.edges == {("alpha_a", "beta_b"): 3} and g3.n == 2  # isolated authors dropped
    late = build_coauthorship(c.ids(), c, (2011, 2015), min_copubs=1)
    assert late.edges == {("beta_b", "gamma_g"): 1}
    with pytest.raises(ValueError, match="outside study period"):
        build_coauthorship(c.ids(), c, (1990, 2010))


def test_build_filters():
    c = _team_corpus()
    intl = build_coauthorship(c.ids(), c, (2000, 2010), 1, CoauthorshipFilters(require_international=True))
    assert intl.weight("alpha_a", "beta_b") == 2  # P3 is domestic
    cited = build_coauthorship(c.ids(), c, (2000, 2010), 1, CoauthorshipFilters(require_cited=True))
    assert cited.weight("alpha_a", "beta_b") == 2  # P2 cited only two years on


def test_descriptors_on_small_graphs():
    tri = graph([("a", "b"), ("b", "c"), ("a", "c")])
    assert density(tri) == 1.0 and avg_collaborators(tri) == 2.0
    path = graph([("a", "b"), ("b", "c")])
    assert betweenness(path) == {"a": 0.0, "b": 1.0, "c": 0.0}
    star = graph([("hub", x) for x in "wxyz"])
    assert betweenness(star)["hub"] == 6.0  # C(4, 2) leaf pairs
    with pytest.raises(ValueError):
        density_nm(1, 0)


def test_betweenness_is_thread_independent(monkeypatch):
    g = nx.gnm_random_graph(120, 300, seed=3)
    cg = graph([(f"v{a:03d}", f"v{b:03d}") for a, b in g.edges])
    monkeypatch.setenv("SPANALYZE_THREADS", "4")
    assert betweenness(cg, workers=4) == betweenness(cg)


def test_components_order():
    g = graph([("d", "e"), ("a", "b"), ("x", "y"), ("x", "z")])
    summary = connected_components(g)
    assert summary.clusters == (("x", "y", "z"), ("a", "b"), ("d", "e"))
    assert summary.n_clusters == 3 and summary.max_size == 3


def test_boundary_spanning_requires_named_graphs():
    g = graph([("a", "b")], name="A")
    with pytest.raises(ValueError):
        boundary_spanning([g])
    with pytest.raises(ValueError):
        boundary_spanning([g, graph([("a", "b")], name="A")])


# -- properties ---------------------------------------------------------------

edge_lists = st.lists(st.tuples(st.integers(0, 11), st.integers(0, 11)).filter(lambda e: e[0] != e[1]),
                      min_size=1, max_size=40)


def _g(edges):
    return graph({tuple(sorted((f"v{a:02d}", f"v{b:02d}"))): 1 for a, b in edges})


@settings(max_examples=150, deadline=None)
@given(edge_lists)
def test_betweenness_sum_identity(edges):
    # each shortest path of length d has d - 1 inner vertices
    g = _g(edges)
    nxg = nx.Graph(list(g.edges))
    dist = dict(nx.all_pairs_shortest_path_length(nxg))
    expected = sum(dist[a][b] - 1 for a, b in combinations(sorted(nxg), 2) if b in dist[a])
    assert sum(betweenness(g).values()) == pytest.approx(expected, abs=1e-9)
    assert all(x >= 0 for x in betweenness(g).values())


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 30), st.randoms(use_true_random=False))
def test_tree_density_and_betweenness(n, rnd):
    # random labeled tree: attach each vertex to an earlier one
    edges = [(rnd.randrange(i), i) for i in range(1, n)]
    g = _g(edges)
    assert density(g) == pytest.approx(float(Fraction(2, n)))
    bc = betweenness(g)
    nxg = nx.Graph(list(g.edges))
    for v in g.vertices:
        # in a tree, v lies on the unique path between vertices of distinct branches
        sizes = [len(c) for c in nx.connected_components(nxg.subgraph(set(nxg) - {v}))]
        pairs = (sum(sizes) ** 2 - sum(s * s for s in sizes)) / 2
        assert bc[v] == pytest.approx(pairs)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.lists(st.sampled_from("ABCDEF"), min_size=2, max_size=4, unique=True),
                          st.integers(2000, 2003)), min_size=1, max_size=25),
       st.integers(1, 3))
def test_min_copubs_is_anti_monotone(spec, k):
    c = Corpus([rec(f"P{i:02d}", y, tuple(f"{a}, X." for a in names)) for i, (names, y) in enumerate(spec)],
               study_period=(2000, 2003))
    lo = build_coauthorship(c.ids(), c, (2000, 2003), k)
    hi = build_coauthorship(c.ids(), c, (2000, 2003), k + 1)
    assert set(hi.vertices) <= set(lo.vertices)
    assert set(hi.edges) <= set(lo.edges)
    assert all(lo.edges[e] == w for e, w in hi.edges.items())


def test_fixture_boundary_team_edges(clean_fixture, manifest):
    aliases = AliasTable.load(FIXTURES / "aliases.txt")
    domains = {d: manifest["domains"][d] for d in ("RET", "NNM", "EECS")}
    filters = CoauthorshipFilters(require_international=True, require_cited=True)
    for wkey, want in manifest["boundary"].items():
        win = tuple(int(x) for x in wkey.split(":"))
        bg = boundary_from_combined(domains, clean_fixture, win, 2, filters, aliases)
        assert (bg.n, bg.m) == (want["n"], want["m"]), wkey
        for team, edges in want["team_edges"].items():
            members = manifest["teams"][team]["members"]
            for pair, w in edges.items():
                i, j = (int(x) for x in pair.split("-"))
                a, b = author_key(members[i], aliases), author_key(members[j], aliases)
                assert bg.weight(a, b) == w, (wkey, team, pair)
