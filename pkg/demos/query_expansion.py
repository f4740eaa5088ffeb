"""
Growing a keyword query from co-occurring keywords
===================================================

Starting from the single seed term "solar cell", two rounds of expansion
on the fixture corpus pick up "dye sensitized" and then "photoanode",
while "water" is refused because it is on the exclusion list.
"""

import json
from pathlib import Path

from spanalyze.corpus import ingest_records
from spanalyze.delineation import DomainQuery, ExpansionConfig, expand_query, retrieve

fixtures = Path(__file__).resolve().parent.parent / "fixtures"
corpus, _ = ingest_records(fixtures / "corpus_small.jsonl", (2000, 2015))

seed = DomainQuery.keyword("PV", ["solar cells"], exclusions=["water"])
print("seed retrieves", len(retrieve(corpus, seed)), "records")

# Keep keywords above the 80% cumulative-count cutoff, and accept one when a
# reference term is among the 3 most frequent keywords of its own records.
expanded, trace = expand_query(corpus, seed, ExpansionConfig(cdf_cutoff=0.8, top_k_frequent=3, rounds=2))
print("expanded retrieves", len(retrieve(corpus, expanded)), "records")

for rnd in trace.rounds:
    print(f"round {rnd.round}: core={rnd.core_size} threshold={rnd.threshold}")
    for kw, n, why in rnd.accepted:
        print(f"  + {kw} ({n}), justified by {why!r}")
    for kw, n, why in rnd.rejected:
        print(f"  - {kw} ({n}): {why}")

# The trace is plain JSON and is identical from run to run.
print(json.dumps(trace.to_dict()["final_terms"]))
