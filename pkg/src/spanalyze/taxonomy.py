"""Organizations, geography and subject fields.

Affiliations are resolved against an ``OrganizationRegistry`` (a
``name|class|region|country`` table).  Organization classes 1-10 roll up
into four sectors: HEI (1-3), GRC (4-6), Health (7-8) and Private (9-10).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .corpus import Affiliation, Corpus, PublicationRecord
from .text import tokenize

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

__all__ = [
    "SECTORS",
    "CollaborationProfile",
    "ContributionTable",
    "FieldMap",
    "GeoConfig",
    "OrgInfo",
    "OrganizationRegistry",
    "RegionIntensity",
    "classify_collaboration",
    "count_contributions",
    "impact_group",
    "is_international",
    "load_regional_gerd",
    "regional_intensity",
]

SECTORS: dict[str, frozenset[int]] = {
    "HEI": frozenset({1, 2, 3}),
    "GRC": frozenset({4, 5, 6}),
    "Health": frozenset({7, 8}),
    "Private": frozenset({9, 10}),
}
UNKNOWN = "unknown"


def sector_of(org_class: int) -> str:
    for name, classes in SECTORS.items():
        if org_class in classes:
            return name
    raise ValueError(f"organization class {org_class} outside 1-10")


def org_key(name: str) -> str:
    return " ".join(tokenize(name))


@dataclass(frozen=True)
class OrgInfo:
    name: str
    org_class: int
    region: str
    country: str

    def __post_init__(self):
        if not 1 <= self.org_class <= 10:
            raise ValueError(f"{self.name}: organization class {self.org_class} outside 1-10")

    @property
    def sector(self) -> str:
        return sector_of(self.org_class)


class OrganizationRegistry:
    def __init__(self, entries: Iterable[OrgInfo] = ()):
        self.entries: dict[str, OrgInfo] = {}
        for e in entries:
            self.entries[org_key(e.name)] = e

    def __len__(self) -> int:
        return len(self.entries)

    def lookup(self, name: str) -> OrgInfo | None:
        return self.entries.get(org_key(name)) if name else None

    @classmethod
    def load(cls, path: str | Path) -> OrganizationRegistry:
        entries = []
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split("|")]
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected org_name|class|region|country")
            entries.append(OrgInfo(parts[0], int(parts[1]), parts[2], parts[3]))
        return cls(entries)


def _packaged(name: str) -> Path:
    return Path(str(resources.files("spanalyze") / "data" / name))


@dataclass(frozen=True)
class GeoConfig:
    eu28: frozenset[str]
    eu_neighbors: frozenset[str]
    home_country: str

    def __post_init__(self):
        overlap = self.eu28 & self.eu_neighbors
        if overlap:
            raise ValueError(f"countries listed both as EU-28 and neighbors: {sorted(overlap)}")

    @classmethod
    def from_dict(cls, d: Mapping) -> GeoConfig:
        return cls(frozenset(d["eu28"]), frozenset(d["eu_neighbors"]), d["home_country"])

    @classmethod
    def load(cls, path: str | Path | None = None) -> GeoConfig:
        path = Path(path) if path else _packaged("geo.toml")
        with open(path, "rb") as fh:
            return cls.from_dict(tomllib.load(fh))


class FieldMap:
    """Subject-category label -> Frascati field; unknown labels are ``unmapped``."""

    UNMAPPED = "unmapped"

    def __init__(self, mapping: Mapping[str, str]):
        self.mapping = dict(mapping)

    def __getitem__(self, label: str) -> str:
        return self.mapping.get(label, self.UNMAPPED)

    def fields(self, labels: Iterable[str]) -> list[str]:
        return sorted({self[l] for l in labels})

    @classmethod
    def load(cls, path: str | Path | None = None) -> FieldMap:
        path = Path(path) if path else _packaged("fieldmap.toml")
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        mapping = {}
        for fld, labels in data["fields"].items():
            for label in labels:
                if label in mapping and mapping[label] != fld:
                    raise ValueError(f"label {label!r} mapped to two fields")
                mapping[label] = fld
        return cls(mapping)


# -- affiliation resolution ------------------------------------------------

@dataclass(frozen=True)
class _Resolved:
    org: str | None
    sector: str | None
    region: str | None
    country: str | None


def _resolve(aff: Affiliation, reg: OrganizationRegistry | None) -> _Resolved:
    info = reg.lookup(aff.org) if reg is not None else None
    if info is None:
        return _Resolved(None, None, aff.region or None, aff.country or None)
    return _Resolved(info.name, info.sector, aff.region or info.region or None, aff.country or info.country or None)


def _affiliations(p: PublicationRecord) -> Iterator[Affiliation]:
    for au in p.authors:
        yield from au.affiliations


def is_international(p: PublicationRecord, home_country: str) -> bool:
    """At least one affiliation in a country other than ``home_country``."""
    return any(c != home_country for c in p.countries)


@dataclass(frozen=True)
class CollaborationProfile:
    institutional: bool = False
    regional: bool = False
    eu: bool = False
    eu_neighbor: bool = False
    other_international: bool = False

    @property
    def international(self) -> bool:
        return self.eu or self.eu_neighbor or self.other_international

    def flags(self) -> dict[str, bool]:
        return {
            "institutional": self.institutional,
            "regional": self.regional,
            "eu": self.eu,
            "eu_neighbor": self.eu_neighbor,
            "other_international": self.other_international,
            "international": self.international,
        }


def classify_collaboration(
    p: PublicationRecord, reg: OrganizationRegistry, geo: GeoConfig
) -> CollaborationProfile:
    """Collaboration types of one publication; the flags may co-occur.

    Institutional collaboration needs home organizations from two different
    sectors; regional collaboration needs two distinct home regions.
    Affiliations that resolve to no country are ignored.
    """
    resolved = [_resolve(a, reg) for a in _affiliations(p)]
    home = [r for r in resolved if r.country == geo.home_country]
    if not home:
        raise ValueError(f"{p.id}: outside collection scope (no {geo.home_country} affiliation)")
    sectors = {r.sector for r in home if r.sector}
    regions = {r.region for r in home if r.region}
    others = {r.country for r in resolved if r.country and r.country != geo.home_country}
    return CollaborationProfile(
        institutional=len(sectors) >= 2,
        regional=len(regions) >= 2,
        eu=bool(others & geo.eu28),
        eu_neighbor=bool(others & geo.eu_neighbors),
        other_international=bool(others - geo.eu28 - geo.eu_neighbors),
    )


def impact_group(p: PublicationRecord, geo: GeoConfig) -> set[str]:
    """Citation-impact collaboration groups: ``european``, ``international``
    (some non-EU-28 country) or ``national`` (home country only)."""
    others = {c for c in p.countries if c != geo.home_country}
    if not others:
        return {"national"}
    groups = set()
    if others & geo.eu28:
        groups.add("european")
    if others - geo.eu28:
        groups.add("international")
    return groups


# -- contribution counting ---------------------------------------------------

DIMENSIONS = ("organization", "region", "country", "sector", "frascati_field")
SCHEMES = ("whole", "whole_normalized")


@dataclass
class ContributionTable:
    dim: str
    scheme: str
    n_pubs: int
    values: dict[str, float] = field(default_factory=dict)
    unknown: float = 0.0

    @property
    def shares(self) -> dict[str, float]:
        if not self.n_pubs:
            return {}
        return {k: v / self.n_pubs for k, v in self.values.items()}

    def rows(self) -> list[tuple[str, float, float]]:
        shares = self.shares
        order = sorted(self.values, key=lambda k: (-self.values[k], k))
        return [(k, self.values[k], shares[k]) for k in order]


def _entities(
    p: PublicationRecord,
    dim: str,
    reg: OrganizationRegistry | None,
    fieldmap: FieldMap | None,
) -> set[str]:
    if dim == "frascati_field":
        if fieldmap is None:
            raise ValueError("frascati_field counting needs a FieldMap")
        labels = {fieldmap[l] for l in p.subject_categories}
        return {UNKNOWN if l == FieldMap.UNMAPPED else l for l in labels} or {UNKNOWN}
    if dim in ("organization", "sector") and reg is None:
        raise ValueError(f"{dim} counting needs an OrganizationRegistry")
    out = set()
    for aff in _affiliations(p):
        r = _resolve(aff, reg)
        value = {"organization": r.org, "region": r.region, "country": r.country, "sector": r.sector}[dim]
        out.add(value or UNKNOWN)
    return out or {UNKNOWN}


def count_contributions(
    pubs: Iterable[str],
    c: Corpus,
    dim: str,
    scheme: str,
    reg: OrganizationRegistry | None = None,
    fieldmap: FieldMap | None = None,
) -> ContributionTable:
    """Whole or whole-normalized counts of entities over a publication set.

    Whole counting credits every distinct entity of a publication with 1, so
    values can sum to more than the number of publications.  Whole-normalized
    counting splits each publication's unit credit equally among its distinct
    entities.  Unresolvable entities are pooled under ``unknown`` and kept
    out of ``values``.
    """
    if dim not in DIMENSIONS:
        raise ValueError(f"unknown dimension {dim!r}")
    if scheme not in SCHEMES:
        raise ValueError(f"unknown counting scheme {scheme!r}")
    ids = sorted(set(pubs))
    acc: dict[str, Fraction] = {}
    for pub_id in ids:
        ents = _entities(c[pub_id], dim, reg, fieldmap)
        w = Fraction(1) if scheme == "whole" else Fraction(1, len(ents))
        for e in ents:
            acc[e] = acc.get(e, Fraction(0)) + w
    unknown = acc.pop(UNKNOWN, Fraction(0))
    return ContributionTable(dim, scheme, len(ids), {k: float(v) for k, v in sorted(acc.items())}, float(unknown))


# -- regional intensity --------------------------------------------------------

@dataclass(frozen=True)
class RegionIntensity:
    region: str
    contributions: float
    gerd: float | None
    ratio: float | None
    classification: str


def regional_intensity(
    contribs: Mapping[str, float],
    gerd: Mapping[str, float],
    min_contribs: int = 10,
) -> dict[str, RegionIntensity]:
    """Contributions per unit of R&D expenditure, relative to the national ratio.

    Regions below ``min_contribs`` are ``insignificant`` whatever their
    expenditure.  The national ratio is total contributions over total
    expenditure across the regions listed in ``gerd``.  A region exactly at
    the national ratio is classified ``at-average``.
    """
    missing = sorted(r for r, n in contribs.items() if n >= min_contribs and not gerd.get(r))
    if missing:
        raise ValueError(f"missing GERD for region {missing[0]}")
    total_c = sum(Fraction(contribs.get(r, 0)) for r in gerd)
    total_g = sum(Fraction(g) for g in gerd.values())
    if total_g <= 0:
        raise ValueError("total GERD must be positive")
    out = {}
    for region in sorted(set(contribs) | set(gerd)):
        n = contribs.get(region, 0)
        g = gerd.get(region)
        ratio = n / g if g else None
        if n < min_contribs:
            cls = "insignificant"
        else:
            # exact comparison of n/g against total_c/total_g
            lhs, rhs = Fraction(n) * total_g, total_c * Fraction(g)
            cls = "above" if lhs > rhs else "below" if lhs < rhs else "at-average"
        out[region] = RegionIntensity(region, n, g, ratio, cls)
    return out


def national_ratio(contribs: Mapping[str, float], gerd: Mapping[str, float]) -> float:
    return float(sum(contribs.get(r, 0) for r in gerd) / sum(gerd.values()))


def load_regional_gerd(path: str | Path | None = None) -> dict[str, float]:
    """Regional GERD keyed by NUTS2 code, from ``region,nuts2,gerd`` CSV."""
    path = Path(path) if path else _packaged("gerd_regions_2013.csv")
    with open(path, encoding="utf-8", newline="") as fh:
        return {row["nuts2"]: float(row["gerd"]) for row in csv.DictReader(fh)}


def region_names(path: str | Path | None = None) -> dict[str, str]:
    path = Path(path) if path else _packaged("gerd_regions_2013.csv")
    with open(path, encoding="utf-8", newline="") as fh:
        return {row["nuts2"]: row["region"] for row in csv.DictReader(fh)}
