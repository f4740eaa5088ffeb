"""Time windows, funding series, regression and per-window network descriptors."""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Corpus
from .graph import (
    AliasTable,
    CoauthorshipFilters,
    CoauthorshipGraph,
    avg_collaborators,
    boundary_from_combined,
    boundary_spanning,
    build_coauthorship,
    connected_components,
    density,
)
from .indicators import entropy_diversity, n_clusters_50, partition_intersections, variance_diversity

__all__ = [
    "BuildParams",
    "CumulativeValue",
    "RegressionFit",
    "WindowRow",
    "WindowSpec",
    "correlate",
    "cumulative_gerd",
    "fit_linear",
    "load_gerd_series",
    "round_half_up",
    "window_graphs",
    "windowed_series",
    "windows",
]


@dataclass(frozen=True)
class WindowSpec:
    """Sliding windows of ``length`` years every ``step`` years, or cumulative
    windows that all start at ``anchor`` and grow one year at a time."""

    mode: str = "sliding"
    length: int = 6
    step: int = 1
    anchor: int | None = None

    def __post_init__(self):
        if self.mode not in ("sliding", "cumulative"):
            raise ValueError(f"unknown window mode {self.mode!r}")
        if self.length < 1:
            raise ValueError("window length must be >= 1")
        if self.step < 1:
            raise ValueError("window step must be >= 1")


def windows(spec: WindowSpec, span: tuple[int, int]) -> list[tuple[int, int]]:
    """Windows of ``spec`` lying inside the year range ``span``.

    >>> windows(WindowSpec("sliding", 6, 3), (2002, 2013))
    [(2002, 2007), (2005, 2010), (2008, 2013)]
    """
    lo, hi = span
    if spec.mode == "cumulative":
        anchor = lo if spec.anchor is None else spec.anchor
        if not lo <= anchor <= hi:
            raise ValueError(f"anchor {anchor} outside {lo}-{hi}")
        return [(anchor, end) for end in range(anchor, hi + 1, spec.step)]
    out = []
    start = lo
    while start + spec.length - 1 <= hi:
        out.append((start, start + spec.length - 1))
        start += spec.step
    return out


# -- funding series ------------------------------------------------------------------

def load_gerd_series(path: str | Path | None = None) -> dict[int, float | None]:
    """Year -> expenditure; ``:`` (not available) becomes ``None``."""
    if path is None:
        path = Path(str(resources.files("spanalyze") / "data" / "gerd_national.csv"))
    series: dict[int, float | None] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if len(header) != 2:
            raise ValueError(f"{path}: expected two columns (year, value)")
        for row in reader:
            if not row:
                continue
            year, value = int(row[0]), row[1].strip()
            if value in (":", ""):
                series[year] = None
            else:
                v = float(value)
                if v < 0:
                    raise ValueError(f"{path}: negative expenditure for {year}")
                series[year] = v
    return series


def _impute(series: Mapping[int, float | None], year: int) -> float:
    known = sorted(y for y, v in series.items() if v is not None)
    if not known:
        raise ValueError("no known values to impute from")
    left = [y for y in known if y < year]
    right = [y for y in known if y > year]
    if left and right:
        a, b = left[-1], right[0]
    elif len(left) >= 2:
        a, b = left[-2], left[-1]
    elif len(right) >= 2:
        a, b = right[0], right[1]
    else:
        return float(series[known[0]])
    va, vb = series[a], series[b]
    return va + (vb - va) * (year - a) / (b - a)


@dataclass(frozen=True)
class CumulativeValue:
    window: tuple[int, int]
    value: float
    imputed: tuple[int, ...] = ()


def cumulative_gerd(
    series: Mapping[int, float | None],
    wins: Iterable[tuple[int, int]],
    impute: str | None = None,
) -> list[CumulativeValue]:
    """Sum of expenditure over each window ``[a, b]``.

    Missing years raise ``ValueError`` unless ``impute="linear"``, which
    interpolates between the nearest known years (extrapolating from the
    two nearest at the edges) and lists the imputed years in the result.
    """
    if impute not in (None, "linear"):
        raise ValueError(f"unknown imputation rule {impute!r}")
    out = []
    for a, b in wins:
        total = 0.0
        filled = []
        for y in range(a, b + 1):
            v = series.get(y)
            if v is None:
                if impute is None:
                    raise ValueError(f"missing GERD for year {y}")
                v = _impute(series, y)
                filled.append(y)
            total += v
        out.append(CumulativeValue((a, b), total, tuple(filled)))
    return out


# -- regression ------------------------------------------------------------------------

@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    r_squared: float
    n_points: int

    def predict(self, x):
        return self.slope * np.asarray(x, dtype=float) + self.intercept


def fit_linear(x: Sequence[float], y: Sequence[float]) -> RegressionFit:
    """Ordinary least squares ``y = slope * x + intercept``.

    Solved in closed form on centered data.  ``r_squared`` is
    ``1 - SS_res / SS_tot`` and is reported as 1 when ``y`` is constant.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d sequences of equal length")
    if len(x) < 2:
        raise ValueError("need at least 2 points")
    if np.ptp(x) == 0:
        raise ValueError("zero variance in predictor")
    xm, ym = x.mean(), y.mean()
    dx, dy = x - xm, y - ym
    slope = float(math.fsum(dx * dy) / math.fsum(dx * dx))
    intercept = float(ym - slope * xm)
    resid = y - (slope * x + intercept)
    ss_res = math.fsum(resid * resid)
    ss_tot = math.fsum(dy * dy)
    r2 = 1.0 if ss_tot == 0 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return RegressionFit(slope, intercept, r2, len(x))


def correlate(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or len(x) < 2:
        raise ValueError("need two equal-length series of at least 2 points")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ValueError("constant input")
    dx, dy = x - x.mean(), y - y.mean()
    r = math.fsum(dx * dy) / math.sqrt(math.fsum(dx * dx) * math.fsum(dy * dy))
    return max(-1.0, min(1.0, r))


# -- per-window descriptors --------------------------------------------------------------

@dataclass(frozen=True)
class BuildParams:
    min_copubs: int = 2
    filters: CoauthorshipFilters = CoauthorshipFilters()
    aliases: AliasTable | None = None
    copub_scope: str = "combined"

    def __post_init__(self):
        if self.copub_scope not in ("combined", "per_domain"):
            raise ValueError(f"unknown copub_scope {self.copub_scope!r}")


def window_graphs(
    c: Corpus,
    domains: Mapping[str, Iterable[str]],
    window: tuple[int, int],
    params: BuildParams = BuildParams(),
) -> tuple[dict[str, CoauthorshipGraph], CoauthorshipGraph]:
    """Per-domain coauthorship graphs and the boundary-spanning graph."""
    domain_sets = {d: frozenset(ids) for d, ids in domains.items()}
    graphs = {
        d: build_coauthorship(ids, c, window, params.min_copubs, params.filters, None, params.aliases, d)
        for d, ids in domain_sets.items()
    }
    if params.copub_scope == "combined":
        bg = boundary_from_combined(domain_sets, c, window, params.min_copubs, params.filters, params.aliases)
    else:
        bg = boundary_spanning(list(graphs.values()))
    return graphs, bg


@dataclass(frozen=True)
class WindowRow:
    network: str
    window_start: int
    window_end: int
    n: int
    m: int
    n_clusters: int
    max_cluster: int
    density: float
    avg_collab: float
    V: float | None = None
    H: float | None = None
    nc50: int | None = None
    empty: bool = False
    shares: dict[str, float] = field(default_factory=dict)


def describe(g: CoauthorshipGraph, domains: Sequence[str] | None = None, boundary: bool = False) -> WindowRow:
    lo, hi = g.window
    if g.n == 0:
        return WindowRow(g.name, lo, hi, 0, 0, 0, 0, 0.0, 0.0, 0.0 if boundary else None,
                         0.0 if boundary else None, 0 if boundary else None, True)
    summary = connected_components(g)
    V = H = nc50 = None
    shares: dict[str, float] = {}
    if boundary:
        part = partition_intersections(g, domains)
        V, H = variance_diversity(part), entropy_diversity(part)
        nc50 = n_clusters_50(summary)
        shares = part.shares()
    return WindowRow(
        g.name, lo, hi, g.n, g.m, summary.n_clusters, summary.max_size,
        density(g) if g.n >= 2 else 0.0, avg_collaborators(g), V, H, nc50, False, shares,
    )


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SPANALYZE_THREADS", "1")))
    except ValueError:
        return 1


def windowed_series(
    c: Corpus,
    domains: Mapping[str, Iterable[str]],
    spec: WindowSpec,
    params: BuildParams = BuildParams(),
    span: tuple[int, int] | None = None,
    include_domains: bool = True,
) -> list[WindowRow]:
    """Descriptor rows (domains first, then ``boundary``) for every window.

    Windows are independent; with ``SPANALYZE_THREADS`` > 1 they are built
    concurrently, but rows always come back in window order.
    """
    span = span or c.study_period
    order = list(domains)
    domain_sets = {d: frozenset(domains[d]) for d in order}

    def one(win):
        graphs, bg = window_graphs(c, domain_sets, win, params)
        rows = [describe(graphs[d]) for d in order] if include_domains else []
        rows.append(describe(bg, order, boundary=True))
        return rows

    wins = windows(spec, span)
    n = _threads()
    if n > 1 and len(wins) > 1:
        with ThreadPoolExecutor(n) as pool:
            chunks = list(pool.map(one, wins))
    else:
        chunks = [one(w) for w in wins]
    return [row for chunk in chunks for row in chunk]


# -- serialization helpers ---------------------------------------------------------------

def round_half_up(x: float, digits: int) -> float:
    """Round like a table does (0.0125 -> 0.013), not to even."""
    q = Decimal(1).scaleb(-digits)
    return float(Decimal(repr(float(x))).quantize(q, rounding=ROUND_HALF_UP))


def format_fixed(x: float | None, digits: int) -> str:
    if x is None:
        return ""
    q = Decimal(1).scaleb(-digits)
    return str(Decimal(repr(float(x))).quantize(q, rounding=ROUND_HALF_UP))


TABLE_COLUMNS = [
    "network", "window_start", "window_end", "n", "m", "N_c", "max_cluster",
    "density", "avg_collab", "V", "H", "Nc50", "empty",
]


def table_rows(rows: Iterable[WindowRow]) -> list[list[str]]:
    """Rows formatted at table precision: density 3 decimals, averages 1, V and H 2."""
    out = []
    for r in rows:
        out.append([
            r.network, str(r.window_start), str(r.window_end), str(r.n), str(r.m),
            str(r.n_clusters), str(r.max_cluster), format_fixed(r.density, 3),
            format_fixed(r.avg_collab, 1), format_fixed(r.V, 2), format_fixed(r.H, 2),
            "" if r.nc50 is None else str(r.nc50), "1" if r.empty else "0",
        ])
    return out


def write_table(rows: Iterable[WindowRow], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE_COLUMNS)
        w.writerows(table_rows(rows))
