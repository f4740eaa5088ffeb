"""Generate the 300-record fixture corpus and its hand-derived manifest.

Run from the repository root:

    python3 fixtures/make_fixture.py [OUTPUT_DIR]

The corpus is built from a small table of author teams.  Every expected
value in ``manifest.json`` is derived from that table here (team sizes,
years and domain labels), never by running the package on the output, so
the tests can use the manifest as an independent oracle.

No randomness: names, organizations and filler text cycle through fixed
lists.
"""
from __future__ import annotations

import csv
import json
import math
import sys
from collections import Counter
from itertools import combinations
from pathlib import Path

HERE = Path(__file__).resolve().parent
PERIOD = (2000, 2015)
N_RECORDS = 300

# -- vocabulary --------------------------------------------------------------

RET_PHRASES = ["wind turbine", "fuel cell", "biofuel", "hydrogen storage", "wind power", "bioenergy"]
NNM_PHRASES = ["nanoparticle", "graphene", "quantum dot", "nanowire", "thin film", "nanocomposite"]
RET_SUBJECT = "Energy and Fuels"
NNM_SUBJECT = "Materials Science, Multidisciplinary"
EECS_SUBJECTS = ["Electrical and Electronic Engineering", "Computer Science, Information Systems"]
NEUTRAL_SUBJECTS = ["Environmental Sciences", "Economics", "Agronomy", "Oncology", "Mathematics, Applied"]
NEUTRAL_TOPICS = [
    "urban traffic flow", "coastal erosion record", "dairy supply chain", "archival metadata",
    "seismic hazard map", "olive cultivation practice", "tourism demand", "maritime logistics",
    "groundwater quality", "labour market mobility", "vineyard irrigation", "hospital admission",
]
NEUTRAL_KEYWORDS = ["survey", "policy", "case study", "statistics", "regional development", "monitoring"]

GR_ORGS = [
    # name, class, NUTS2 region
    ("National Technical University of Athens", 1, "EL30"),
    ("University of Patras", 1, "EL63"),
    ("Aristotle University of Thessaloniki", 1, "EL52"),
    ("University of Crete", 1, "EL43"),
    ("Foundation for Research and Technology Hellas", 4, "EL43"),
    ("National Centre for Scientific Research Demokritos", 4, "EL30"),
    ("Centre for Research and Technology Hellas", 4, "EL52"),
    ("University of Ioannina", 1, "EL54"),
    ("Technological Educational Institute of Thessaly", 2, "EL61"),
    ("Evangelismos Hospital", 7, "EL30"),
    ("Hellenic Petroleum", 9, "EL30"),
]
FOREIGN_ORGS = [
    ("Technical University of Munich", 1, "DE21", "DE"),
    ("Politecnico di Milano", 1, "ITC4", "IT"),
    ("CNRS Grenoble", 4, "FRK2", "FR"),
    ("University of Cambridge", 1, "UKH1", "GB"),
    ("University of Belgrade", 1, "RS11", "RS"),
    ("Massachusetts Institute of Technology", 1, "", "US"),
]

GR_STEMS = ["Kosta", "Nikol", "Georgi", "Dimitr", "Vasil", "Alexand", "Ioann", "Christo",
            "Theodor", "Anton", "Stavr", "Michal", "Panag", "Konstant", "Manol", "Spyr"]
GR_ENDINGS = ["opoulos", "idis", "akis", "atos", "ellis", "ou"]
FOREIGN_NAMES = ["Müller", "Schmidt", "Rossi", "Bianchi", "Dubois", "Martin", "Smith", "Jones",
                 "Petrović", "Jovanović", "Weber", "Ricci", "Moreau", "Brown", "Wilson", "Fischer",
                 "Marino", "Laurent", "Taylor", "Nikolić", "Wagner", "Greco", "Lefebvre", "Evans"]
INITIALS = "ABDEGHIKLMNPST"


class Names:
    """Hands out author names with distinct author keys."""

    def __init__(self):
        # surname x initial gives 96 * 14 distinct keys
        self.gr = (f"{s}{e}, {i}." for i in INITIALS for e in GR_ENDINGS for s in GR_STEMS)
        self.foreign = iter(FOREIGN_NAMES)
        self.n_foreign = 0

    def greek(self) -> str:
        return next(self.gr)

    def foreigner(self) -> str:
        try:
            surname = next(self.foreign)
        except StopIteration:  # recycle surnames with a different initial
            self.foreign = iter(FOREIGN_NAMES)
            self.n_foreign += 1
            surname = next(self.foreign)
        return f"{surname}, {INITIALS[(self.n_foreign + 3) % len(INITIALS)]}."

    def anonymous(self, i: int) -> str:
        # member of a large consortium, surnames like "Memberaab"
        letters = ""
        for _ in range(3):
            i, r = divmod(i, 26)
            letters = chr(97 + r) + letters
        return f"Member{letters}, Q."


NAMES = Names()


def gr_author(name: str, k: int) -> dict:
    org = GR_ORGS[k % len(GR_ORGS)]
    return {"name": name, "org": org[0], "country": "GR"}


def foreign_author(name: str, k: int) -> dict:
    org = FOREIGN_ORGS[k % len(FOREIGN_ORGS)]
    return {"name": name, "org": org[0], "country": org[3]}


# -- team design -------------------------------------------------------------

# (team, domain label, size, first year, last year).  Labels: RN = RET&NNM,
# NE = NNM&EECS, RE = RET&EECS, RNE = all three.  A 4-author team writes
# three papers (years y1, y1, y2) whose author sets are {a,b,c,d},
# {a,b,c}, {a,b,d}: the graph is K4 minus the c-d edge.  Smaller teams
# write two papers (y1, y2) with the full team.
TEAMS = [
    ("T01", "RN", 3, 2000, 2001),
    ("T02", "NE", 3, 2001, 2002),
    ("T03", "RN", 4, 2002, 2003),
    ("T04", "RE", 2, 2003, 2004),
    ("T05", "NE", 3, 2004, 2005),
    ("T06", "RN", 3, 2005, 2006),
    ("T07", "NE", 4, 2006, 2007),
    ("T08", "RN", 3, 2007, 2008),
    ("T09", "RN", 4, 2008, 2009),
    ("T10", "NE", 4, 2008, 2010),
    ("T11", "RN", 4, 2009, 2010),
    ("T12", "RNE", 2, 2010, 2011),
    ("T13", "RN", 4, 2010, 2011),
    ("T14", "NE", 4, 2011, 2012),
    ("T15", "RN", 4, 2011, 2012),
    ("T16", "NE", 4, 2012, 2013),
    ("T17", "RN", 4, 2012, 2013),
    ("T18", "RN", 3, 2014, 2015),
    ("T19", "NE", 3, 2013, 2014),
    # single-domain teams
    ("S01", "R", 3, 2009, 2010),
    ("S02", "N", 4, 2006, 2009),
    ("S03", "E", 3, 2010, 2012),
]
LABEL_DOMAINS = {
    "RN": ("RET", "NNM"), "NE": ("NNM", "EECS"), "RE": ("RET", "EECS"),
    "RNE": ("RET", "NNM", "EECS"), "R": ("RET",), "N": ("NNM",), "E": ("EECS",),
}
# T13's first home author appears once under a variant spelling; the alias file
# maps it back to the same key.
ALIAS_TEAM = "T13"
ALIAS_CANONICAL = "Papadopoulos, G."
ALIAS_VARIANT = "Papadopoulou, G."
ALIAS_KEY = "papadopoulos_g"


def team_papers(size: int, y1: int, y2: int) -> list[tuple[int, tuple[int, ...]]]:
    if size == 4:
        return [(y1, (0, 1, 2, 3)), (y1, (0, 1, 2)), (y2, (0, 1, 3))]
    return [(y1, tuple(range(size))), (y2, tuple(range(size)))]


# -- record builders ---------------------------------------------------------

records: list[dict] = []
citations: list[tuple[str, str, int]] = []
manifest: dict = {"domains": {"RET": [], "NNM": [], "EECS": []}, "teams": {}}
_ext = iter(range(1, 10_000))


def add(rec: dict, domains: tuple[str, ...] = ()) -> dict:
    rec.setdefault("abstract", "")
    rec.setdefault("type", "journal_article" if len(records) % 3 else "proceedings_paper")
    records.append(rec)
    for d in domains:
        manifest["domains"][d].append(rec["id"])
    return rec


def cite_externally(pub_id: str, year: int, n: int = 1) -> None:
    for _ in range(n):
        citations.append((f"EXT{next(_ext):04d}", pub_id, min(year + 1, PERIOD[1])))


def domain_text(domains: tuple[str, ...], k: int) -> tuple[str, list[str], list[str]]:
    """Title, keywords and subjects placing a record in exactly ``domains``."""
    words, keywords, subjects = [], [], []
    if "NNM" in domains:
        phrase = NNM_PHRASES[k % len(NNM_PHRASES)]
        words.append(phrase)
        keywords.append(phrase)
        subjects.append(NNM_SUBJECT)
    if "RET" in domains:
        phrase = RET_PHRASES[k % len(RET_PHRASES)]
        words.append(phrase)
        keywords.append(phrase)
        subjects.append(RET_SUBJECT)
    if "EECS" in domains:
        subjects.append(EECS_SUBJECTS[k % len(EECS_SUBJECTS)])
        keywords.append("signal processing")
    title = "Characterization of " + " for ".join(words) if words else "Scalable signal processing architectures"
    return title, keywords, subjects


def build_teams() -> None:
    for t, (team, label, size, y1, y2) in enumerate(TEAMS):
        domains = LABEL_DOMAINS[label]
        people = [NAMES.greek() for _ in range(size - 1)]
        if team == ALIAS_TEAM:
            people[0] = ALIAS_CANONICAL
        # the foreign coauthor is member a, who is on every paper, so all
        # team papers count as international collaborations
        members = [NAMES.foreigner()] + people
        papers = team_papers(size, y1, y2)
        ids = []
        for j, (year, idx) in enumerate(papers):
            pub_id = f"{team}-P{j + 1}"
            title, keywords, subjects = domain_text(domains, t + j)
            authors = []
            for i in idx:
                name = members[i]
                if team == ALIAS_TEAM and i == 1 and j == 2:
                    name = ALIAS_VARIANT
                if i == 0:
                    authors.append(foreign_author(name, t))
                else:
                    # team members sit at two different home organizations
                    authors.append(gr_author(name, t + i))
            add({"id": pub_id, "year": year, "title": title, "keywords": keywords,
                 "authors": authors, "subjects": subjects}, domains)
            # international work is well cited
            cite_externally(pub_id, year, n=2)
            ids.append(pub_id)
        manifest["teams"][team] = {
            "label": label, "domains": list(domains), "papers": ids,
            "years": [y for y, _ in papers], "members": [m for m in members],
        }


def build_expansion_group() -> None:
    """Records for the hand-traced query expansion (domain PV)."""
    c_keywords = {
        1: ["solar cells", "dye-sensitized", "electrode"],
        2: ["solar cells", "dye-sensitized"],
        3: ["solar cells", "dye-sensitized"],
        4: ["solar cells", "dye-sensitized"],
        5: ["solar cells", "water", "electrode"],
        6: ["solar cells", "water", "perovskite"],
        7: ["solar cells", "water"],
        8: ["solar cells", "efficiency"],
    }
    for k, kws in c_keywords.items():
        year = 2004 + k
        add({"id": f"C{k}", "year": year, "title": f"Laboratory study {k} of solar cells",
             "keywords": kws, "authors": [gr_author(NAMES.greek(), k), gr_author(NAMES.greek(), k + 1)],
             "subjects": [RET_SUBJECT]}, ("RET",))
    for k in range(1, 4):
        add({"id": f"D{k}", "year": 2010 + k, "title": f"Photoanode preparation route {k}",
             "keywords": ["dye-sensitized", "photoanode"],
             "authors": [gr_author(NAMES.greek(), k)], "subjects": ["Chemistry, Physical"]})
    manifest["expansion"] = {
        "domain": "PV",
        "seed_terms": ["solar cell"],
        "exclusions": ["water"],
        "config": {"cdf_cutoff": 0.8, "top_k_frequent": 3, "rounds": 2},
        # round 1: core C1-C8, counts solar cell 8, dye sensitized 4, water 3,
        # electrode 2, efficiency 1, perovskite 1 (total 19); cumulative
        # shares .42 .63 .79 .89 -> threshold 3
        # round 2: core C1-C8 + D1-D3, counts 8, 7, 3, 3, 2, 1, 1 (total 25);
        # shares .32 .60 .72 .84 -> threshold 3
        "rounds": [
            {"round": 1, "core_size": 8, "threshold": 3,
             "accepted": [["dye sensitized", 4, "solar cell"]],
             "rejected": [["water", 3, "excluded"]]},
            {"round": 2, "core_size": 11, "threshold": 3,
             "accepted": [["photoanode", 3, "dye sensitized"]],
             "rejected": [["water", 3, "excluded"]]},
        ],
        "final_terms": ["solar cell", "dye sensitized", "photoanode"],
    }


def neutral(pub_id: str, year: int, k: int, subjects=None, n_authors: int = 2) -> dict:
    topic = NEUTRAL_TOPICS[k % len(NEUTRAL_TOPICS)]
    return {"id": pub_id, "year": year, "title": f"Assessment of {topic}",
            "abstract": f"We report field observations on {topic}.",
            "keywords": [NEUTRAL_KEYWORDS[k % len(NEUTRAL_KEYWORDS)], topic],
            "authors": [gr_author(NAMES.greek(), k + i) for i in range(n_authors)],
            "subjects": subjects or [NEUTRAL_SUBJECTS[k % len(NEUTRAL_SUBJECTS)]]}


SELF_CITE_DOMAIN = "EECS"
SELF_CITE_YEAR = 2011
SELF_CITE_TOTAL = 9
SELF_CITE_CITING = 2


def build_domain_noise() -> None:
    """Domestic single-author-group records; they never form edges."""
    # one domestic RET record brings RET to 41 records
    rec = neutral("R-N01", 2007, 0)
    rec["title"] = "Wind power forecasting for island grids"
    rec["keywords"] = ["wind power", "forecasting"]
    rec["subjects"] = [RET_SUBJECT]
    add(rec, ("RET",))
    for k in range(20):
        rec = neutral(f"N-N{k + 1:02d}", PERIOD[0] + k % 16, k)
        phrase = NNM_PHRASES[k % len(NNM_PHRASES)]
        rec["title"] = f"Synthesis route for {phrase}"
        rec["keywords"] = [phrase]
        rec["subjects"] = [NNM_SUBJECT]
        add(rec, ("NNM",))
    # EECS: enough records that SELF_CITE_YEAR holds SELF_CITE_TOTAL EECS records
    eecs_in_year = sum(1 for r in records if r["year"] == SELF_CITE_YEAR and r["id"] in set(manifest["domains"]["EECS"]))
    fill = SELF_CITE_TOTAL - eecs_in_year
    assert fill >= SELF_CITE_CITING, fill
    k = 0
    years = [SELF_CITE_YEAR] * fill + [y for y in range(PERIOD[0], PERIOD[1] + 1) if y != SELF_CITE_YEAR]
    for year in years:
        k += 1
        rec = neutral(f"E-N{k:02d}", year, k, subjects=[EECS_SUBJECTS[k % 2]])
        rec["title"] = f"Scheduling heuristics for {NEUTRAL_TOPICS[k % len(NEUTRAL_TOPICS)]}"
        add(rec, ("EECS",))
    # the first SELF_CITE_CITING fill records cite an EECS record of the previous year
    prev = sorted(i for i in manifest["domains"]["EECS"]
                  if next(r for r in records if r["id"] == i)["year"] == SELF_CITE_YEAR - 1)
    citing = [f"E-N{i:02d}" for i in range(1, SELF_CITE_CITING + 1)]
    for c_id in citing:
        citations.append((c_id, prev[0], SELF_CITE_YEAR))
    manifest["self_citation"] = {
        "domain": SELF_CITE_DOMAIN, "year": SELF_CITE_YEAR, "publications": SELF_CITE_TOTAL,
        "citing": citing, "rate": SELF_CITE_CITING / SELF_CITE_TOTAL,
    }


def build_large_records() -> None:
    sizes = {"BIG-101": 101, "BIG-120": 120, "BIG-150": 150, "BIG-100": 100}
    offset = 0
    for pub_id, n in sizes.items():
        authors = [gr_author(NAMES.anonymous(offset + i), i) for i in range(n)]
        authors[-1] = foreign_author(NAMES.anonymous(offset + n - 1), 0)
        offset += n
        rec = neutral(pub_id, 2012, 3)
        rec["title"] = "Consortium report on " + NEUTRAL_TOPICS[len(pub_id) % len(NEUTRAL_TOPICS)]
        rec["authors"] = authors
        add(rec)
    manifest["oversized"] = ["BIG-101", "BIG-120", "BIG-150"]


def build_filler() -> None:
    k = 0
    while len(records) < N_RECORDS:
        k += 1
        add(neutral(f"X{k:03d}", PERIOD[0] + k % 16, k + 5, n_authors=1 + k % 3))


# -- expected values -----------------------------------------------------------

def expected_boundary(window: tuple[int, int]) -> dict:
    """Composition, clusters and edges of the boundary network in ``window``,
    recounted from the team table."""
    lo, hi = window
    counts = Counter()
    sizes = []
    edges = {}
    for team, label, size, y1, y2 in TEAMS:
        if len(LABEL_DOMAINS[label]) < 2:
            continue
        papers = [p for p in team_papers(size, y1, y2) if lo <= p[0] <= hi]
        w = Counter()
        for _, idx in papers:
            for a, b in combinations(idx, 2):
                w[(a, b)] += 1
        kept = {e: n for e, n in w.items() if n >= 2}
        members = {v for e in kept for v in e}
        if not members:
            continue
        counts[label] += len(members)
        sizes.append(len(members))
        edges[team] = {f"{a}-{b}": n for (a, b), n in sorted(kept.items())}
    n = sum(counts.values())
    sizes.sort(reverse=True)
    nc50 = 0
    if n:
        run = 0
        for nc50, s in enumerate(sizes, 1):
            run += s
            if run >= math.ceil(n / 2):
                break
    fr = [counts[l] / n for l in ("RN", "RE", "NE", "RNE")] if n else [0, 0, 0, 0]
    return {
        "n": n, "m": sum(len(e) for e in edges.values()),
        "composition": {"RET&NNM": counts["RN"], "RET&EECS": counts["RE"],
                        "NNM&EECS": counts["NE"], "RET&NNM&EECS": counts["RNE"]},
        "V": 1 - sum(p * p for p in fr),
        "H": sum(-p * math.log10(p) for p in fr if p > 0),
        "clusters": len(sizes), "max_cluster": sizes[0] if sizes else 0, "Nc50": nc50,
        "team_edges": edges,
    }


def main(out: Path = HERE) -> None:
    build_teams()
    build_expansion_group()
    build_domain_noise()
    build_large_records()
    build_filler()
    assert len(records) == N_RECORDS, len(records)
    assert len({r["id"] for r in records}) == N_RECORDS

    manifest["records"] = N_RECORDS
    manifest["errors"] = 0
    manifest["after_cleaning"] = N_RECORDS - len(manifest["oversized"])
    manifest["domains"] = {d: sorted(ids) for d, ids in manifest["domains"].items()}
    assert len(manifest["domains"]["RET"]) == 41, len(manifest["domains"]["RET"])
    manifest["alias"] = {"variant": ALIAS_VARIANT, "key": ALIAS_KEY, "team": ALIAS_TEAM}
    manifest["boundary"] = {f"{a}:{b}": expected_boundary((a, b))
                            for a, b in [(2002, 2007), (2005, 2010), (2008, 2013)]}
    manifest["cumulative_clusters"] = {
        str(end): expected_boundary((2000, end))["clusters"] for end in range(2000, 2014)
    }

    with open(out / "corpus_small.jsonl", "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    with open(out / "citations_small.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["citing_id", "cited_id", "citing_year"])
        w.writerows(citations)
    with open(out / "registry.txt", "w", encoding="utf-8") as fh:
        fh.write("# org_name|class|region|country\n")
        for name, cls, region in GR_ORGS:
            fh.write(f"{name}|{cls}|{region}|GR\n")
        for name, cls, region, country in FOREIGN_ORGS:
            fh.write(f"{name}|{cls}|{region}|{country}\n")
    with open(out / "aliases.txt", "w", encoding="utf-8") as fh:
        fh.write("# raw author name|author key\n")
        fh.write(f"{ALIAS_VARIANT}|{ALIAS_KEY}\n")
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else HERE)
