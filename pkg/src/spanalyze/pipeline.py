"""File-based pipeline stages behind the command-line interface.

Each stage reads its upstream artifacts from the output directory, writes
its own files, and records every file it wrote (with a SHA-256 digest) in
``manifest.json`` together with the digests of the config and input files.
Nothing in the output depends on the clock, the machine or the order of
input lines, so two runs on the same inputs give byte-identical trees.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
from contextlib import contextmanager
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Iterator

from . import __version__
from .analysis import (
    BuildParams,
    WindowRow,
    correlate,
    cumulative_gerd,
    describe,
    fit_linear,
    format_fixed,
    load_gerd_series,
    round_half_up,
    table_rows,
    TABLE_COLUMNS,
    window_graphs,
    windowed_series,
    windows,
)
from .config import RunConfig
from .corpus import Corpus, clean_corpus, dumps_corpus, ingest_records
from .delineation import DomainQuery, expand_query, read_term_file, retrieve, using_normalizer
from .graph import AliasTable, CoauthorshipFilters, CoauthorshipGraph, betweenness, connected_components
from .graphio import to_dot, to_graphml
from .indicators import (
    citation_impact,
    intersection_categories,
    category_label,
    partition_intersections,
    self_citation_rate,
)
from .taxonomy import (
    FieldMap,
    GeoConfig,
    OrganizationRegistry,
    classify_collaboration,
    count_contributions,
    is_international,
    load_regional_gerd,
    region_names,
    regional_intensity,
)
from .text import Normalizer, load_overrides

log = logging.getLogger(__name__)

__all__ = ["MissingArtifact", "OutputLocked", "STAGES", "Workspace", "run_stage"]

STAGES = ("ingest", "delineate", "network", "boundary", "indicators", "windows", "report", "export")
BOUNDARY = "boundary"


class MissingArtifact(Exception):
    def __init__(self, name: str):
        super().__init__(f"missing artifact {name}")
        self.name = name


class OutputLocked(Exception):
    pass


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _csv(header: list[str], rows: Iterable[Iterable]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _num(x: float | None, digits: int = 6) -> float | None:
    """Round for JSON output so last-bit float noise never reaches a file."""
    return None if x is None else round_half_up(x, digits)


def _wtag(window: tuple[int, int]) -> str:
    return f"{window[0]}-{window[1]}"


def _wkey(window: tuple[int, int]) -> str:
    return f"{window[0]}:{window[1]}"


# -- workspace ---------------------------------------------------------------------

class Workspace:
    """Output directory with a manifest of everything written into it."""

    def __init__(self, cfg: RunConfig, out: Path | None = None):
        self.cfg = cfg
        self.root = Path(out) if out is not None else cfg.output
        self.manifest_path = self.root / "manifest.json"
        self._written: dict[str, str] = {}

    # manifest -------------------------------------------------------------
    def _inputs(self) -> dict[str, dict[str, str]]:
        return {
            name: {"path": self.cfg.relpath(p), "sha256": _sha256(p.read_bytes())}
            for name, p in sorted(self.cfg.inputs().items())
        }

    def _load_manifest(self, inputs) -> dict:
        base = {
            "tool": {"name": "spanalyze", "version": __version__},
            "config": {"path": self.cfg.source.name, "sha256": self.cfg.digest},
            "inputs": inputs,
            "stages": {},
        }
        if self.manifest_path.is_file():
            try:
                old = json.loads(self.manifest_path.read_text(encoding="utf-8"))
            except ValueError:
                old = {}
            # stage records survive only if they were made from the same inputs
            if old.get("config") == base["config"] and old.get("inputs") == inputs and old.get("tool") == base["tool"]:
                base["stages"] = old.get("stages", {})
        return base

    def commit(self, stage: str) -> None:
        inputs = self._inputs()
        manifest = self._load_manifest(inputs)
        manifest["stages"][stage] = {"files": dict(sorted(self._written.items()))}
        self.manifest_path.write_text(_json(manifest), encoding="utf-8")
        self._written = {}

    # files ----------------------------------------------------------------
    def write(self, rel: str, text: str) -> None:
        data = text.encode("utf-8")
        path = self.root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        self._written[rel] = _sha256(data)

    def path(self, rel: str) -> Path:
        p = self.root / rel
        if not p.is_file():
            raise MissingArtifact(rel)
        return p

    def read(self, rel: str) -> str:
        return self.path(rel).read_text(encoding="utf-8")

    @contextmanager
    def lock(self) -> Iterator[None]:
        self.root.mkdir(parents=True, exist_ok=True)
        lock = self.root / ".lock"
        try:
            fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise OutputLocked(f"output directory is locked: {lock}") from None
        try:
            os.write(fd, str(os.getpid()).encode())
            os.close(fd)
            yield
        finally:
            lock.unlink(missing_ok=True)


# -- shared loaders ----------------------------------------------------------------

@dataclass
class Options:
    window: tuple[int, int] | None = None
    domain: str | None = None
    fmt: str | None = None


def _corpus(ws: Workspace) -> Corpus:
    records = ws.path("corpus/records.jsonl")
    cites = ws.path("corpus/citations.csv")
    corpus, report = ingest_records(records, ws.cfg.period, cites)
    if report.errors or report.citation_errors:
        raise ValueError("corpus artifacts are corrupt; rerun ingest")
    return corpus


def _domain_ids(ws: Workspace, name: str) -> list[str]:
    return [l for l in ws.read(f"domains/{name}.ids.txt").splitlines() if l]


def _network_domains(ws: Workspace) -> dict[str, list[str]]:
    return {d: _domain_ids(ws, d) for d in ws.cfg.network_domains}


def _params(cfg: RunConfig) -> BuildParams:
    geo = GeoConfig.load(cfg.geo)
    return BuildParams(
        cfg.min_copubs,
        CoauthorshipFilters(cfg.require_international, cfg.require_cited, geo.home_country),
        AliasTable.load(cfg.aliases) if cfg.aliases else None,
        cfg.copub_scope,
    )


def _table_windows(cfg: RunConfig, opts: Options) -> list[tuple[int, int]]:
    if opts.window is not None:
        lo, hi = opts.window
        if not cfg.period[0] <= lo <= hi <= cfg.period[1]:
            raise ValueError(f"window {lo}:{hi} outside study period {cfg.period[0]}:{cfg.period[1]}")
        return [opts.window]
    return windows(cfg.table_windows, cfg.table_span)


def _graph_text(g: CoauthorshipGraph, fmt: str) -> dict[str, str]:
    """Serialized graph as {suffix: text}."""
    bc = betweenness(g)
    if fmt == "graphml":
        return {".graphml": to_graphml(g, bc)}
    if fmt == "dot":
        return {".dot": to_dot(g, bc)}
    if fmt == "csv":
        vertices = _csv(["key", "domains", "betweenness"],
                        ([v, ";".join(sorted(a.domains)), repr(bc[v])] for v, a in g.vertices.items()))
        edges = _csv(["source", "target", "weight"], ([a, b, w] for (a, b), w in g.edges.items()))
        return {".vertices.csv": vertices, ".edges.csv": edges}
    if fmt == "json":
        doc = {
            "name": g.name, "window": list(g.window) if g.window else None, "min_copubs": g.min_copubs,
            "nodes": [{"id": v, "domains": sorted(a.domains), "betweenness": bc[v]} for v, a in g.vertices.items()],
            "edges": [{"source": a, "target": b, "weight": w} for (a, b), w in g.edges.items()],
        }
        return {".json": _json(doc)}
    raise ValueError(f"unknown export format {fmt!r}")


# -- stages --------------------------------------------------------------------------

def stage_ingest(ws: Workspace, opts: Options) -> dict:
    cfg = ws.cfg
    corpus, report = ingest_records(cfg.corpus, cfg.period, cfg.citations)
    cleaned, cleaning = clean_corpus(corpus, cfg.max_authors)
    records, cites = dumps_corpus(cleaned)
    ws.write("corpus/records.jsonl", records)
    ws.write("corpus/citations.csv", cites)
    ws.write("corpus/ingest_report.json", _json(report.to_dict()))
    ws.write("corpus/cleaning_report.json", _json(cleaning.to_dict()))
    return {
        "lines": report.lines,
        "accepted": report.accepted,
        "errors": len(report.errors),
        "duplicates": len(report.duplicates),
        "out_of_period": len(report.out_of_period),
        "citations": report.citations_accepted,
        "citation_errors": len(report.citation_errors),
        "citations_out_of_period": report.citations_out_of_period,
        "removed_oversized": cleaning.removed,
        "records": cleaning.after,
    }


def _query(spec) -> DomainQuery:
    if spec.mode == "subject_category":
        return DomainQuery.subject_category(spec.name, read_term_file(spec.subjects))
    excl = read_term_file(spec.exclusions) if spec.exclusions else []
    return DomainQuery.keyword(spec.name, read_term_file(spec.terms), excl)


def stage_delineate(ws: Workspace, opts: Options) -> dict:
    cfg = ws.cfg
    corpus = _corpus(ws)
    normalizer = Normalizer(load_overrides(cfg.overrides)) if cfg.overrides else Normalizer()
    with using_normalizer(normalizer):
        return _delineate(ws, corpus)


def _delineate(ws: Workspace, corpus: Corpus) -> dict:
    cfg = ws.cfg
    summary: dict = {"domains": {}, "overlaps": {}}
    sets: dict[str, frozenset[str]] = {}
    for spec in cfg.domains:
        q = _query(spec)
        entry = {"mode": spec.mode, "network": spec.network}
        if spec.expansion is not None:
            q, trace = expand_query(corpus, q, spec.expansion)
            ws.write(f"domains/{spec.name}.trace.json", trace.to_json())
            entry["expansion"] = {
                "rounds": len(trace.rounds),
                "accepted": [{"keyword": k, "round": r.round, "justified_by": s}
                             for r in trace.rounds for k, _, s in r.accepted],
            }
        ids = retrieve(corpus, q)
        sets[spec.name] = ids
        terms = q.subjects if spec.mode == "subject_category" else q.active_terms
        ws.write(f"domains/{spec.name}.ids.txt", "".join(f"{i}\n" for i in sorted(ids)))
        ws.write(f"domains/{spec.name}.terms.txt", "".join(f"{t}\n" for t in terms))
        entry["size"] = len(ids)
        entry["terms"] = len(terms)
        summary["domains"][spec.name] = entry
    names = cfg.network_domains
    for k in range(2, len(names) + 1):
        for combo in combinations(names, k):
            common = frozenset.intersection(*(sets[d] for d in combo))
            summary["overlaps"]["&".join(combo)] = len(common)
    ws.write("domains/summary.json", _json(summary))
    return summary


def stage_network(ws: Workspace, opts: Options) -> dict:
    cfg = ws.cfg
    corpus = _corpus(ws)
    domains = _network_domains(ws)
    if opts.domain is not None and opts.domain not in domains:
        raise ValueError(f"unknown network domain {opts.domain!r}")
    params = _params(cfg)
    rows = []
    for win in _table_windows(cfg, opts):
        graphs, _ = window_graphs(corpus, domains, win, params)
        for name, g in graphs.items():
            if opts.domain is not None and name != opts.domain:
                continue
            ws.write(f"networks/{name}_{_wtag(win)}.graphml", _graph_text(g, "graphml")[".graphml"])
            rows.append(describe(g))
    ws.write("networks/summary.csv", _csv(TABLE_COLUMNS, table_rows(rows)))
    return {"graphs": len(rows)}


def stage_boundary(ws: Workspace, opts: Options) -> dict:
    cfg = ws.cfg
    corpus = _corpus(ws)
    domains = _network_domains(ws)
    order = list(domains)
    params = _params(cfg)
    cats = [category_label(c, order) for c in intersection_categories(order)]
    part_rows, div_rows, cluster_rows = [], [], []
    summary = {}
    for win in _table_windows(cfg, opts):
        _, bg = window_graphs(corpus, domains, win, params)
        ws.write(f"boundary/boundary_{_wtag(win)}.graphml", _graph_text(bg, "graphml")[".graphml"])
        row = describe(bg, order, boundary=True)
        clusters = connected_components(bg)
        counts = dict.fromkeys(cats, 0)
        if bg.n:
            part = partition_intersections(bg, order)
            counts = dict(zip(part.labels, part.counts))
        for label in cats:
            share = counts[label] / bg.n if bg.n else 0.0
            part_rows.append([win[0], win[1], label, counts[label], format_fixed(share, 4)])
        div_rows.append([win[0], win[1], bg.n, len(cats), format_fixed(row.V, 4),
                         format_fixed(row.H, 4), row.nc50])
        for rank, members in enumerate(clusters.clusters, 1):
            cluster_rows.append([win[0], win[1], rank, len(members), ";".join(members)])
        bc = betweenness(bg)
        top = sorted(bc.items(), key=lambda kv: (-kv[1], kv[0]))[:5]
        summary[_wkey(win)] = {
            "n": bg.n, "m": bg.m, "clusters": row.n_clusters, "max_cluster": row.max_cluster,
            "Nc50": row.nc50, "V": _num(row.V), "H": _num(row.H),
            "composition": counts,
            "top_betweenness": [[k, _num(v)] for k, v in top if v > 0],
        }
    ws.write("boundary/partition.csv", _csv(["window_start", "window_end", "category", "count", "share"], part_rows))
    ws.write("boundary/diversity.csv", _csv(["window_start", "window_end", "n", "K", "V", "H", "Nc50"], div_rows))
    ws.write("boundary/clusters.csv", _csv(["window_start", "window_end", "rank", "size", "members"], cluster_rows))
    return summary


def _impact_rows(cfg: RunConfig, corpus: Corpus, name: str, ids: list[str], geo: GeoConfig):
    intl = [i for i in ids if is_international(corpus[i], geo.home_country)]
    dom = [i for i in ids if not is_international(corpus[i], geo.home_country)]
    rows, summary = [], {}
    for year in cfg.impact_years:
        entry = {}
        for group, pubs in (("all", ids), ("international", intl), ("domestic", dom)):
            try:
                pt = citation_impact(pubs, corpus, year, reference=ids,
                                     weighting=cfg.ci_weighting, scope=cfg.ci_scope)
            except ValueError:
                continue
            entry[group] = {"CI": _num(pt.CI), "CI_rel": _num(pt.CI_rel)}
            rows.append([name, year, group, format_fixed(pt.CI, 4), format_fixed(pt.CI_rel, 4)])
        try:
            rate = self_citation_rate(ids, corpus, year)
        except ValueError:
            rate = None
        entry["self_citation_rate"] = _num(rate)
        rows.append([name, year, "self_citation_rate", "", format_fixed(rate, 4)] if rate is not None else
                    [name, year, "self_citation_rate", "", ""])
        summary[str(year)] = entry
    return rows, summary


def stage_indicators(ws: Workspace, opts: Options) -> dict:
    cfg = ws.cfg
    corpus = _corpus(ws)
    domains = _network_domains(ws)
    geo = GeoConfig.load(cfg.geo)
    reg = OrganizationRegistry.load(cfg.registry) if cfg.registry else None
    fieldmap = FieldMap.load(cfg.fieldmap)
    gerd = load_regional_gerd(cfg.gerd_regions)
    names = region_names(cfg.gerd_regions)
    home_regions = set(gerd)
    if reg is not None:
        home_regions |= {e.region for e in reg.entries.values() if e.country == geo.home_country and e.region}

    impact_rows, collab_rows, contrib_rows, regional_rows = [], [], [], []
    summary: dict = {"impact": {}, "collaboration": {}, "regional": {}}
    flags = ["institutional", "regional", "eu", "eu_neighbor", "other_international", "international"]
    dims = ["country", "region", "frascati_field"] + (["organization", "sector"] if reg else [])
    for name, ids in domains.items():
        rows, imp = _impact_rows(cfg, corpus, name, ids, geo)
        impact_rows += rows
        summary["impact"][name] = imp

        counts = dict.fromkeys(flags, 0)
        out_of_scope = 0
        for i in ids:
            try:
                prof = classify_collaboration(corpus[i], reg, geo)
            except ValueError:
                out_of_scope += 1
                continue
            for k, v in prof.flags().items():
                counts[k] += v
        collab_rows.append([name, len(ids)] + [counts[f] for f in flags] + [out_of_scope])
        summary["collaboration"][name] = {**counts, "publications": len(ids), "out_of_scope": out_of_scope}

        for dim in dims:
            for scheme in ("whole", "whole_normalized"):
                table = count_contributions(ids, corpus, dim, scheme, reg, fieldmap)
                for entity, value, share in table.rows():
                    contrib_rows.append([name, dim, scheme, entity, format_fixed(value, 4), format_fixed(share, 4)])
                if table.unknown:
                    contrib_rows.append([name, dim, scheme, "unknown", format_fixed(table.unknown, 4), ""])

        # regional intensity over home-country regions, whole counting
        regions = count_contributions(ids, corpus, "region", "whole", reg, fieldmap).values
        home = {r: v for r, v in regions.items() if r in home_regions}
        if home:
            result = regional_intensity(home, gerd, cfg.min_contribs)
            classes: dict[str, list[str]] = {}
            for r, ri in result.items():
                regional_rows.append([name, r, names.get(r, ""), format_fixed(ri.contributions, 1),
                                      "" if ri.gerd is None else format_fixed(ri.gerd, 2),
                                      "" if ri.ratio is None else format_fixed(ri.ratio, 6), ri.classification])
                classes.setdefault(ri.classification, []).append(r)
            summary["regional"][name] = classes
        else:
            summary["regional"][name] = {}

    ws.write("indicators/impact.csv", _csv(["domain", "year", "group", "CI", "CI_rel"], impact_rows))
    ws.write("indicators/collaboration.csv",
             _csv(["domain", "publications"] + flags + ["out_of_scope"], collab_rows))
    ws.write("indicators/contributions.csv",
             _csv(["domain", "dimension", "scheme", "entity", "value", "share"], contrib_rows))
    ws.write("indicators/regional_intensity.csv",
             _csv(["domain", "nuts2", "region", "contributions", "gerd", "ratio", "class"], regional_rows))
    return summary


def _row_dict(r: WindowRow) -> dict:
    d = {
        "network": r.network, "window_start": r.window_start, "window_end": r.window_end,
        "n": r.n, "m": r.m, "N_c": r.n_clusters, "max_cluster": r.max_cluster,
        "density": round_half_up(r.density, 3), "avg_collab": round_half_up(r.avg_collab, 1),
        "empty": r.empty,
    }
    if r.V is not None:
        d.update(V=round_half_up(r.V, 2), H=round_half_up(r.H, 2), Nc50=r.nc50)
    return d


def stage_windows(ws: Workspace, opts: Options) -> dict:
    cfg = ws.cfg
    corpus = _corpus(ws)
    domains = _network_domains(ws)
    params = _params(cfg)

    table = windowed_series(corpus, domains, cfg.table_windows, params, cfg.table_span)
    ws.write("windows/table.csv", _csv(TABLE_COLUMNS, table_rows(table)))

    # clusters of the boundary network against cumulative GERD over growing windows
    cum = windowed_series(corpus, domains, cfg.cumulative, params, cfg.cumulative_span, include_domains=False)
    series = load_gerd_series(cfg.gerd_national)
    gerd = cumulative_gerd(series, [(r.window_start, r.window_end) for r in cum], cfg.impute_gerd)
    ws.write("windows/clusters_vs_gerd.csv", _csv(
        ["window_start", "window_end", "N_c", "cumulative_gerd", "imputed_years"],
        ([r.window_start, r.window_end, r.n_clusters, format_fixed(g.value, 2), ";".join(map(str, g.imputed))]
         for r, g in zip(cum, gerd)),
    ))

    # entropy diversity against N_c,50% over sliding windows
    reg = windowed_series(corpus, domains, cfg.regression_windows, params, cfg.regression_span, include_domains=False)
    ws.write("windows/nc50_vs_diversity.csv", _csv(
        ["window_start", "window_end", "n", "Nc50", "H"],
        ([r.window_start, r.window_end, r.n, r.nc50, format_fixed(r.H, 4)] for r in reg),
    ))

    fits: dict = {"clusters_gerd": {"points": len(cum), "pearson_r": None,
                            "imputed_years": sorted({y for g in gerd for y in g.imputed})},
                  "nc50_diversity": {"points": 0}}
    try:
        fits["clusters_gerd"]["pearson_r"] = _num(correlate([g.value for g in gerd], [r.n_clusters for r in cum]))
    except ValueError as exc:
        fits["clusters_gerd"]["note"] = str(exc)
    pts = [(r.nc50, r.H) for r in reg if not r.empty]
    fits["nc50_diversity"]["points"] = len(pts)
    try:
        fit = fit_linear([x for x, _ in pts], [y for _, y in pts])
        fits["nc50_diversity"].update(
            slope=_num(fit.slope, 8), intercept=_num(fit.intercept, 8), r_squared=_num(fit.r_squared),
            # the same line written as H = (N + offset) / divisor
            offset=_num(fit.intercept / fit.slope, 4) if fit.slope else None,
            divisor=_num(1 / fit.slope, 4) if fit.slope else None,
        )
    except ValueError as exc:
        fits["nc50_diversity"]["note"] = str(exc)
    ws.write("windows/fits.json", _json(fits))
    return {"table": [_row_dict(r) for r in table], **fits}


def stage_export(ws: Workspace, opts: Options) -> dict:
    cfg = ws.cfg
    corpus = _corpus(ws)
    domains = _network_domains(ws)
    net = opts.domain or BOUNDARY
    if net != BOUNDARY and net not in domains:
        raise ValueError(f"unknown network {net!r}")
    win = opts.window or windows(cfg.table_windows, cfg.table_span)[-1]
    _table_windows(cfg, Options(window=win))
    graphs, bg = window_graphs(corpus, domains, win, _params(cfg))
    g = bg if net == BOUNDARY else graphs[net]
    written = []
    for suffix, text in _graph_text(g, opts.fmt or "graphml").items():
        rel = f"exports/{net}_{_wtag(win)}{suffix}"
        ws.write(rel, text)
        written.append(rel)
    return {"files": written}


def stage_report(ws: Workspace, opts: Options) -> dict:
    """Run every upstream stage, then write ``report.json``."""
    report = {}
    for name in ("ingest", "delineate", "network", "boundary", "indicators", "windows"):
        report[name] = STAGE_FUNCS[name](ws, Options())
        ws.commit(name)
    doc = {
        "tool": {"name": "spanalyze", "version": __version__},
        "config_sha256": ws.cfg.digest,
        "corpus": report["ingest"],
        "domains": report["delineate"]["domains"],
        "overlaps": report["delineate"]["overlaps"],
        "table": report["windows"]["table"],
        "boundary": report["boundary"],
        "clusters_gerd": report["windows"]["clusters_gerd"],
        "nc50_diversity": report["windows"]["nc50_diversity"],
        "impact": report["indicators"]["impact"],
        "collaboration": report["indicators"]["collaboration"],
        "regional": report["indicators"]["regional"],
    }
    ws.write("report.json", _json(doc))
    return doc


STAGE_FUNCS = {
    "ingest": stage_ingest,
    "delineate": stage_delineate,
    "network": stage_network,
    "boundary": stage_boundary,
    "indicators": stage_indicators,
    "windows": stage_windows,
    "export": stage_export,
    "report": stage_report,
}


def run_stage(ws: Workspace, stage: str, opts: Options | None = None) -> dict:
    """Run one stage under the output-directory lock and update the manifest."""
    if stage not in STAGE_FUNCS:
        raise ValueError(f"unknown stage {stage!r}")
    with ws.lock():
        result = STAGE_FUNCS[stage](ws, opts or Options())
        ws.commit(stage)
    return result
