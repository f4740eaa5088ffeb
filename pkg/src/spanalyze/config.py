"""Run configuration: one TOML file describing inputs, domains and parameters.

Relative paths are resolved against the directory holding the config file.
A path of the form ``builtin:NAME`` refers to a file shipped with the
package (``builtin:terms/ret.txt``, ``builtin:data/geo.toml``).
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .analysis import WindowSpec
from .delineation import ExpansionConfig

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

__all__ = ["ConfigError", "DomainSpec", "RunConfig", "load_config"]


class ConfigError(ValueError):
    """Invalid configuration; ``field`` is the dotted name of the culprit."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class DomainSpec:
    name: str
    mode: str
    terms: Path | None = None
    exclusions: Path | None = None
    subjects: Path | None = None
    expansion: ExpansionConfig | None = None
    network: bool = True


@dataclass(frozen=True)
class RunConfig:
    source: Path
    digest: str
    corpus: Path
    citations: Path | None
    registry: Path | None
    aliases: Path | None
    overrides: Path | None
    geo: Path
    fieldmap: Path
    gerd_national: Path
    gerd_regions: Path
    output: Path
    period: tuple[int, int]
    table_windows: WindowSpec
    table_span: tuple[int, int]
    regression_windows: WindowSpec
    regression_span: tuple[int, int]
    cumulative: WindowSpec
    cumulative_span: tuple[int, int]
    impute_gerd: str | None
    min_copubs: int
    max_authors: int
    min_contribs: int
    require_international: bool
    require_cited: bool
    copub_scope: str
    ci_weighting: str
    ci_scope: str
    impact_years: tuple[int, ...]
    domains: tuple[DomainSpec, ...] = field(default=())

    @property
    def network_domains(self) -> list[str]:
        return [d.name for d in self.domains if d.network]

    def relpath(self, p: Path) -> str:
        """Path as written in manifests: relative to the config directory."""
        try:
            return p.relative_to(self.source.parent).as_posix()
        except ValueError:
            pkg = Path(str(resources.files("spanalyze")))
            try:
                return "builtin:" + p.relative_to(pkg).as_posix()
            except ValueError:
                return p.as_posix()

    def inputs(self) -> dict[str, Path]:
        out = {
            "corpus": self.corpus, "geo": self.geo, "fieldmap": self.fieldmap,
            "gerd_national": self.gerd_national, "gerd_regions": self.gerd_regions,
        }
        for key in ("citations", "registry", "aliases", "overrides"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        for d in self.domains:
            for key in ("terms", "exclusions", "subjects"):
                p = getattr(d, key)
                if p is not None:
                    out[f"domains.{d.name}.{key}"] = p
        return out


# -- parsing -----------------------------------------------------------------

def _get(tbl: Mapping, key: str, where: str, kind, default: Any = ...):
    if key not in tbl:
        if default is ...:
            raise ConfigError(f"{where}{key}", "required")
        return default
    value = tbl[key]
    if kind is int and (isinstance(value, bool) or not isinstance(value, int)):
        raise ConfigError(f"{where}{key}", "must be an integer")
    if kind is float and (isinstance(value, bool) or not isinstance(value, (int, float))):
        raise ConfigError(f"{where}{key}", "must be a number")
    if kind is bool and not isinstance(value, bool):
        raise ConfigError(f"{where}{key}", "must be true or false")
    if kind is str and not isinstance(value, str):
        raise ConfigError(f"{where}{key}", "must be a string")
    return float(value) if kind is float else value


def _path(value: str | None, base: Path, name: str, must_exist: bool = True) -> Path | None:
    if value is None or value == "":
        return None
    if not isinstance(value, str):
        raise ConfigError(name, "must be a path string")
    if value.startswith("builtin:"):
        p = Path(str(resources.files("spanalyze"))) / value[len("builtin:"):]
    else:
        p = Path(value)
        p = p if p.is_absolute() else base / p
    if must_exist and not p.is_file():
        raise ConfigError(name, f"file not found: {value}")
    return p


def _span(tbl: Mapping, key: str, where: str, default, period) -> tuple[int, int]:
    value = tbl.get(key, default)
    if not (isinstance(value, list) and len(value) == 2 and all(isinstance(v, int) for v in value)):
        raise ConfigError(f"{where}{key}", "must be [start, end]")
    lo, hi = value
    if not period[0] <= lo <= hi <= period[1]:
        raise ConfigError(f"{where}{key}", f"must lie within the study period {period[0]}-{period[1]}")
    return lo, hi


def _expansion(tbl: Mapping, where: str) -> ExpansionConfig:
    values = {
        "cdf_cutoff": _get(tbl, "cdf_cutoff", where, float, 0.05),
        "top_k_frequent": _get(tbl, "top_k_frequent", where, int, 20),
        "rounds": _get(tbl, "rounds", where, int, 1),
    }
    try:
        return ExpansionConfig(**values)
    except ValueError as exc:
        key = next((k for k in values if k in str(exc)), "")
        raise ConfigError(f"{where}{key}".rstrip("."), str(exc)) from None


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate a run configuration; raises ``ConfigError``."""
    src = Path(path).resolve()
    try:
        raw = src.read_bytes()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError("config", f"invalid TOML: {exc}") from None
    base = src.parent

    paths = doc.get("paths", {})

    def p(key: str, default: str | None = None, required: bool = False) -> Path | None:
        value = paths.get(key, default)
        if required and not value:
            raise ConfigError(f"paths.{key}", "required")
        return _path(value, base, f"paths.{key}")

    period_tbl = doc.get("period", {})
    start = _get(period_tbl, "start", "period.", int)
    end = _get(period_tbl, "end", "period.", int)
    if not 1000 <= start <= end <= 9999:
        raise ConfigError("period", "start and end must be 4-digit years with start <= end")
    period = (start, end)

    win = doc.get("windows", {})
    length = _get(win, "length", "windows.", int, 6)
    step = _get(win, "step", "windows.", int, 3)
    reg_step = _get(win, "regression_step", "windows.", int, 1)
    if length < 1:
        raise ConfigError("windows.length", "must be >= 1")
    if step < 1:
        raise ConfigError("windows.step", "must be >= 1")
    if reg_step < 1:
        raise ConfigError("windows.regression_step", "must be >= 1")
    table_span = _span(win, "span", "windows.", list(period), period)
    reg_span = _span(win, "regression_span", "windows.", list(period), period)
    cum_span = _span(win, "cumulative_span", "windows.", list(period), period)
    impute = _get(win, "impute_gerd", "windows.", str, "none")
    if impute not in ("none", "linear"):
        raise ConfigError("windows.impute_gerd", "must be 'none' or 'linear'")

    thr = doc.get("thresholds", {})
    min_copubs = _get(thr, "min_copubs", "thresholds.", int, 2)
    max_authors = _get(thr, "max_authors", "thresholds.", int, 100)
    min_contribs = _get(thr, "min_contribs", "thresholds.", int, 10)
    for key, value in (("min_copubs", min_copubs), ("max_authors", max_authors), ("min_contribs", min_contribs)):
        if value < 1:
            raise ConfigError(f"thresholds.{key}", "must be >= 1")

    net = doc.get("network", {})
    copub_scope = _get(net, "copub_scope", "network.", str, "combined")
    if copub_scope not in ("combined", "per_domain"):
        raise ConfigError("network.copub_scope", "must be 'combined' or 'per_domain'")

    imp = doc.get("impact", {})
    weighting = _get(imp, "weighting", "impact.", str, "weighted")
    if weighting not in ("weighted", "unweighted"):
        raise ConfigError("impact.weighting", "must be 'weighted' or 'unweighted'")
    ci_scope = _get(imp, "scope", "impact.", str, "window")
    if ci_scope not in ("window", "all"):
        raise ConfigError("impact.scope", "must be 'window' or 'all'")
    years = imp.get("years", list(range(start + 2, end + 1)))
    if not isinstance(years, list) or not all(isinstance(y, int) and start <= y <= end for y in years):
        raise ConfigError("impact.years", "must be a list of years within the study period")

    domains = []
    raw_domains = doc.get("domains", [])
    if not isinstance(raw_domains, list) or not raw_domains:
        raise ConfigError("domains", "at least one [[domains]] entry is required")
    seen = set()
    for i, d in enumerate(raw_domains):
        where = f"domains[{i}]."
        name = _get(d, "name", where, str)
        if not name or not name.replace("_", "").isalnum():
            raise ConfigError(f"{where}name", "must be a non-empty alphanumeric name")
        if name in seen or name == "boundary":
            raise ConfigError(f"{where}name", f"duplicate or reserved domain name {name!r}")
        seen.add(name)
        mode = _get(d, "mode", where, str, "keyword")
        if mode not in ("keyword", "subject_category"):
            raise ConfigError(f"{where}mode", "must be 'keyword' or 'subject_category'")
        spec = DomainSpec(
            name=name,
            mode=mode,
            terms=_path(d.get("terms"), base, f"{where}terms"),
            exclusions=_path(d.get("exclusions"), base, f"{where}exclusions"),
            subjects=_path(d.get("subjects"), base, f"{where}subjects"),
            expansion=_expansion(d["expansion"], f"{where}expansion.") if "expansion" in d else None,
            network=_get(d, "network", where, bool, True),
        )
        if mode == "keyword" and spec.terms is None:
            raise ConfigError(f"{where}terms", "required in keyword mode")
        if mode == "subject_category" and spec.subjects is None:
            raise ConfigError(f"{where}subjects", "required in subject_category mode")
        if spec.expansion is not None and mode != "keyword":
            raise ConfigError(f"{where}expansion", "only keyword-mode domains can be expanded")
        domains.append(spec)
    if sum(d.network for d in domains) < 2:
        raise ConfigError("domains", "at least two domains must take part in the network analysis")

    filt = doc.get("filters", {})
    output = paths.get("output", "out")
    if not isinstance(output, str) or not output:
        raise ConfigError("paths.output", "must be a directory path")

    return RunConfig(
        source=src,
        digest=hashlib.sha256(raw).hexdigest(),
        corpus=p("corpus", required=True),
        citations=p("citations"),
        registry=p("registry"),
        aliases=p("aliases"),
        overrides=p("overrides"),
        geo=p("geo", "builtin:data/geo.toml"),
        fieldmap=p("fieldmap", "builtin:data/fieldmap.toml"),
        gerd_national=p("gerd_national", "builtin:data/gerd_national.csv"),
        gerd_regions=p("gerd_regions", "builtin:data/gerd_regions_2013.csv"),
        output=Path(output) if Path(output).is_absolute() else base / output,
        period=period,
        table_windows=WindowSpec("sliding", length, step),
        table_span=table_span,
        regression_windows=WindowSpec("sliding", length, reg_step),
        regression_span=reg_span,
        cumulative=WindowSpec("cumulative", length, 1, cum_span[0]),
        cumulative_span=cum_span,
        impute_gerd=None if impute == "none" else impute,
        min_copubs=min_copubs,
        max_authors=max_authors,
        min_contribs=min_contribs,
        require_international=_get(filt, "require_international", "filters.", bool, True),
        require_cited=_get(filt, "require_cited", "filters.", bool, True),
        copub_scope=copub_scope,
        ci_weighting=weighting,
        ci_scope=ci_scope,
        impact_years=tuple(sorted(set(years))),
        domains=tuple(domains),
    )
