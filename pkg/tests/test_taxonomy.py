from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from spanalyze.corpus import Affiliation, AuthorEntry, Corpus, PublicationRecord
from spanalyze.taxonomy import (
    FieldMap,
    GeoConfig,
    OrgInfo,
    OrganizationRegistry,
    classify_collaboration,
    count_contributions,
    impact_group,
    is_international,
    load_regional_gerd,
    national_ratio,
    regional_intensity,
    sector_of,
)

from conftest import FIXTURES

REG = OrganizationRegistry([
    OrgInfo("University of Patras", 1, "EL63", "GR"),
    OrgInfo("National Technical University of Athens", 1, "EL30", "GR"),
    OrgInfo("Centre for Research and Technology Hellas", 4, "EL52", "GR"),
    OrgInfo("Acme Photonics SA", 9, "EL30", "GR"),
])
GEO = GeoConfig.load()


def pub(pub_id, *affs, subjects=()):
    """One author per affiliation; an affiliation is (org, country) or (org, region, country)."""
    authors = []
    for i, a in enumerate(affs):
        org, region, country = (a[0], "", a[1]) if len(a) == 2 else a
        authors.append(AuthorEntry(f"Author{i}, A.", (Affiliation(org, region, country),)))
    return PublicationRecord(pub_id, 2010, "journal_article", "t", authors=tuple(authors),
                             subject_categories=tuple(subjects))


def test_sector_rollup():
    assert [sector_of(k) for k in (1, 3, 4, 6, 7, 8, 9, 10)] == ["HEI", "HEI", "GRC", "GRC", "Health", "Health", "Private", "Private"]
    with pytest.raises(ValueError):
        sector_of(11)
    with pytest.raises(ValueError):
        OrgInfo("x", 0, "", "GR")


def test_registry_lookup_is_tolerant_of_case_and_punctuation():
    assert REG.lookup("UNIVERSITY OF PATRAS,").org_class == 1
    assert REG.lookup("Unknown Institute") is None
    assert REG.lookup("") is None


def test_registry_file(tmp_path):
    reg = OrganizationRegistry.load(FIXTURES / "registry.txt")
    assert len(reg) > 5
    bad = tmp_path / "r.txt"
    bad.write_text("only|three|fields\n", encoding="utf-8")
    with pytest.raises(ValueError, match="expected"):
        OrganizationRegistry.load(bad)


def test_geo_groups():
    assert GEO.home_country == "GR"
    assert "DE" in GEO.eu28 and "RS" in GEO.eu_neighbors
    with pytest.raises(ValueError, match="both"):
        GeoConfig(frozenset({"AL"}), frozenset({"AL"}), "GR")


def test_collaboration_flags_can_co_occur():
    p = pub("P", ("University of Patras", "GR"), ("Centre for Research and Technology Hellas", "GR"),
            ("TU Munich", "DE"), ("Univ Belgrade", "RS"), ("MIT", "US"))
    prof = classify_collaboration(p, REG, GEO)
    assert prof.institutional and prof.regional
    assert prof.eu and prof.eu_neighbor and prof.other_international and prof.international


def test_collaboration_same_sector_is_not_institutional():
    p = pub("P", ("University of Patras", "GR"), ("National Technical University of Athens", "GR"))
    prof = classify_collaboration(p, REG, GEO)
    assert not prof.institutional and prof.regional and not prof.international


def test_collaboration_needs_home_affiliation():
    with pytest.raises(ValueError, match="outside collection scope"):
        classify_collaboration(pub("P", ("MIT", "US")), REG, GEO)


def test_impact_groups():
    assert impact_group(pub("P", ("x", "GR")), GEO) == {"national"}
    assert impact_group(pub("P", ("x", "GR"), ("y", "FR")), GEO) == {"european"}
    assert impact_group(pub("P", ("x", "GR"), ("y", "FR"), ("z", "US")), GEO) == {"european", "international"}
    assert is_international(pub("P", ("x", "GR"), ("z", "RS")), "GR")


def test_whole_and_normalized_counting():
    c = Corpus([
        pub("A", ("University of Patras", "GR"), ("TU Munich", "DE")),
        pub("B", ("University of Patras", "GR")),
        pub("C", ("nowhere", "")),
    ])
    whole = count_contributions(["A", "B", "C"], c, "country", "whole")
    norm = count_contributions(["A", "B", "C"], c, "country", "whole_normalized")
    assert whole.values == {"DE": 1.0, "GR": 2.0} and whole.unknown == 1.0
    assert norm.values == {"DE": 0.5, "GR": 1.5} and norm.unknown == 1.0
    assert whole.rows()[0] == ("GR", 2.0, 2 / 3)
    sectors = count_contributions(["A", "B"], c, "sector", "whole", REG)
    assert sectors.values == {"HEI": 2.0} and sectors.unknown == 1.0
    with pytest.raises(ValueError):
        count_contributions(["A"], c, "sector", "whole")
    with pytest.raises(ValueError):
        count_contributions(["A"], c, "planet", "whole")


def test_frascati_fields():
    fm = FieldMap.load()
    c = Corpus([pub("A", ("x", "GR"), subjects=("Energy and Fuels", "Chemistry, Physical")),
                pub("B", ("x", "GR"), subjects=("Basket Weaving",))])
    t = count_contributions(["A", "B"], c, "frascati_field", "whole_normalized", fieldmap=fm)
    assert t.values == {"Engineering and Technology": 0.5, "Natural Sciences": 0.5}
    assert t.unknown == 1.0


countries = st.sampled_from(["GR", "DE", "FR", "US", "RS", ""])


@settings(max_examples=80, deadline=None)
@given(st.lists(st.lists(countries, min_size=1, max_size=4), min_size=1, max_size=12))
def test_contribution_sums(spec):
    c = Corpus([pub(f"P{i}", *[("org", k) for k in cs]) for i, cs in enumerate(spec)])
    ids = list(c.ids())
    norm = count_contributions(ids, c, "country", "whole_normalized")
    whole = count_contributions(ids, c, "country", "whole")
    assert sum(norm.values.values()) + norm.unknown == pytest.approx(len(ids))
    assert sum(whole.values.values()) + whole.unknown >= len(ids)
    assert all(norm.values[k] <= whole.values[k] for k in norm.values)


def test_regional_intensity_classes():
    gerd = {"R1": 100.0, "R2": 50.0, "R3": 10.0}
    out = regional_intensity({"R1": 40, "R2": 20, "R3": 3}, gerd, min_contribs=5)
    # national ratio 63/160; R1 and R2 sit at 0.4 > 0.39375
    assert out["R1"].classification == "above" and out["R2"].classification == "above"
    assert out["R3"].classification == "insignificant"
    assert national_ratio({"R1": 40, "R2": 20, "R3": 3}, gerd) == pytest.approx(63 / 160)
    at = regional_intensity({"R1": 20, "R2": 10}, {"R1": 100.0, "R2": 50.0}, 5)
    assert {r.classification for r in at.values()} == {"at-average"}


def test_regional_intensity_missing_gerd():
    with pytest.raises(ValueError, match="missing GERD for region R9"):
        regional_intensity({"R9": 50}, {"R1": 1.0}, 10)


@settings(max_examples=80, deadline=None)
@given(st.dictionaries(st.sampled_from(["A", "B", "C", "D"]), st.integers(0, 60), min_size=2),
       st.integers(1, 1000), st.fractions(Fraction(1, 10), Fraction(50)))
def test_regional_classification_is_scale_invariant(contribs, seed, k):
    gerd = {r: float((seed * (i + 3)) % 97 + 1) for i, r in enumerate(sorted(contribs))}
    base = regional_intensity(contribs, gerd, 5)
    scaled = regional_intensity(contribs, {r: g * float(k) for r, g in gerd.items()}, 5)
    assume(all(v.classification != "at-average" for v in base.values()))
    assert {r: v.classification for r, v in base.items()} == {r: v.classification for r, v in scaled.items()}


def test_packaged_regional_gerd():
    gerd = load_regional_gerd()
    assert len(gerd) == 13 and all(k.startswith("EL") for k in gerd)
    assert gerd["EL30"] == pytest.approx(820.27)
