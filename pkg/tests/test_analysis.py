from __future__ import annotations

import pytest
from hypothesis import assume, given, settings, strategies as st

from spanalyze.analysis import (
    BuildParams,
    WindowSpec,
    correlate,
    cumulative_gerd,
    describe,
    fit_linear,
    format_fixed,
    load_gerd_series,
    round_half_up,
    table_rows,
    window_graphs,
    windowed_series,
    windows,
)
from spanalyze.graph import AliasTable, CoauthorshipFilters, CoauthorshipGraph

from conftest import FIXTURES, graph

DOMAINS = ("RET", "NNM", "EECS")


def test_sliding_and_cumulative_windows():
    assert windows(WindowSpec("sliding", 6, 1), (2000, 2007)) == [(2000, 2005), (2001, 2006), (2002, 2007)]
    assert windows(WindowSpec("sliding", 6, 3), (2000, 2004)) == []
    assert windows(WindowSpec("cumulative", anchor=2000), (2000, 2003)) == [
        (2000, 2000), (2000, 2001), (2000, 2002), (2000, 2003)]
    with pytest.raises(ValueError):
        windows(WindowSpec("cumulative", anchor=1999), (2000, 2003))
    with pytest.raises(ValueError):
        WindowSpec("tumbling")
    with pytest.raises(ValueError):
        WindowSpec(step=0)


def test_gerd_series_and_imputation(tmp_path):
    series = load_gerd_series()
    assert series[2000] is None and series[2002] is None and series[2015] == 1684.0
    (w,) = cumulative_gerd(series, [(2000, 2002)], impute="linear")
    # 2000 extrapolated from 2001 and 2003, 2002 interpolated between them
    assert w.imputed == (2000, 2002)
    assert w.value == pytest.approx(789 + 852 + 915)
    with pytest.raises(ValueError, match="imputation"):
        cumulative_gerd(series, [(2001, 2001)], impute="spline")
    bad = tmp_path / "g.csv"
    bad.write_text("year,value\n2001,-5\n", encoding="utf-8")
    with pytest.raises(ValueError, match="negative"):
        load_gerd_series(bad)


def test_fit_errors():
    with pytest.raises(ValueError, match="zero variance"):
        fit_linear([3, 3, 3], [1, 2, 3])
    with pytest.raises(ValueError, match="at least 2"):
        fit_linear([1], [1])
    with pytest.raises(ValueError, match="constant"):
        correlate([1, 2, 3], [4, 4, 4])
    assert fit_linear([1, 2, 3], [5, 5, 5]).r_squared == 1.0


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(finite, finite), min_size=3, max_size=30))
def test_fit_residuals_sum_to_zero(points):
    x = [p[0] for p in points]
    y = [p[1] for p in points]
    assume(max(x) - min(x) > 1e-3)
    fit = fit_linear(x, y)
    resid = [b - (fit.slope * a + fit.intercept) for a, b in points]
    scale = max(1.0, max(abs(v) for v in y))
    assert abs(sum(resid)) <= 1e-8 * scale * len(points)
    assert 0.0 <= fit.r_squared <= 1.0


@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(st.integers(-50, 50), st.integers(-50, 50)), min_size=3, max_size=20),
       st.floats(0.1, 10), st.floats(-100, 100), st.floats(0.1, 10), st.floats(-100, 100))
def test_pearson_affine_invariance(points, a, b, c, d):
    x = [p[0] for p in points]
    y = [p[1] for p in points]
    assume(len(set(x)) > 1 and len(set(y)) > 1)
    r = correlate(x, y)
    assert correlate([a * v + b for v in x], [c * v + d for v in y]) == pytest.approx(r, abs=1e-9)
    assert correlate([-a * v for v in x], y) == pytest.approx(-r, abs=1e-9)


def test_round_half_up():
    assert round_half_up(0.0125, 3) == 0.013
    assert format_fixed(2.25, 1) == "2.3"
    assert format_fixed(0.0, 3) == "0.000"
    assert format_fixed(None, 2) == ""


def test_describe_empty_and_row_identities():
    empty = describe(CoauthorshipGraph({}, {}, "boundary", (2000, 2005)), DOMAINS, boundary=True)
    assert empty.empty and empty.n == 0 and empty.V == 0.0 and empty.nc50 == 0
    g = graph([("a", "b"), ("b", "c"), ("d", "e")], name="RET", window=(2000, 2005))
    row = describe(g)
    assert (row.n, row.m, row.n_clusters, row.max_cluster) == (5, 3, 2, 3)
    assert row.density * row.n * (row.n - 1) / 2 == pytest.approx(row.m)
    assert row.avg_collab * row.n / 2 == pytest.approx(row.m)
    assert table_rows([row])[0] == ["RET", "2000", "2005", "5", "3", "2", "3", "0.300", "1.2", "", "", "", "0"]


def _params() -> BuildParams:
    return BuildParams(2, CoauthorshipFilters(True, True), AliasTable.load(FIXTURES / "aliases.txt"))


def test_fixture_boundary_rows(clean_fixture, manifest):
    domains = {d: manifest["domains"][d] for d in DOMAINS}
    rows = windowed_series(clean_fixture, domains, WindowSpec("sliding", 6, 3), _params(), (2002, 2013))
    boundary = [r for r in rows if r.network == "boundary"]
    assert len(rows) == 12 and len(boundary) == 3
    for r in boundary:
        want = manifest["boundary"][f"{r.window_start}:{r.window_end}"]
        assert (r.n, r.m, r.n_clusters, r.max_cluster, r.nc50) == (
            want["n"], want["m"], want["clusters"], want["max_cluster"], want["Nc50"])
        assert r.V == pytest.approx(want["V"], abs=1e-12)
        assert r.H == pytest.approx(want["H"], abs=1e-12)
    # the fixture partition was tuned to the published 2008-2013 diversity
    assert boundary[-1].V == pytest.approx(0.52, abs=0.01)


def test_fixture_cumulative_clusters_track_gerd(clean_fixture, manifest):
    domains = {d: manifest["domains"][d] for d in DOMAINS}
    rows = windowed_series(clean_fixture, domains, WindowSpec("cumulative", anchor=2000), _params(), (2000, 2013),
                           include_domains=False)
    got = {str(r.window_end): r.n_clusters for r in rows}
    assert got == manifest["cumulative_clusters"]
    gerd = cumulative_gerd(load_gerd_series(), [(r.window_start, r.window_end) for r in rows], "linear")
    assert correlate([g.value for g in gerd], [r.n_clusters for r in rows]) > 0.95


def test_threaded_series_matches_serial(clean_fixture, manifest, monkeypatch):
    domains = {d: manifest["domains"][d] for d in DOMAINS}
    spec = WindowSpec("sliding", 6, 1)
    serial = windowed_series(clean_fixture, domains, spec, _params())
    monkeypatch.setenv("SPANALYZE_THREADS", "4")
    assert windowed_series(clean_fixture, domains, spec, _params()) == serial


def test_per_domain_scope_is_subgraph_of_combined(clean_fixture, manifest):
    domains = {d: manifest["domains"][d] for d in DOMAINS}
    _, combined = window_graphs(clean_fixture, domains, (2008, 2013), _params())
    per = BuildParams(2, CoauthorshipFilters(True, True), AliasTable.load(FIXTURES / "aliases.txt"), "per_domain")
    _, split = window_graphs(clean_fixture, domains, (2008, 2013), per)
    assert set(split.vertices) <= set(combined.vertices)
    assert set(split.edges) <= set(combined.edges)
    with pytest.raises(ValueError):
        BuildParams(copub_scope="both")
