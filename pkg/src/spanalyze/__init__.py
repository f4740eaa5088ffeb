"""Coauthorship-network analysis of interdisciplinary research.

Delineate science and technology domains in a bibliographic corpus, build
windowed coauthorship graphs, extract the network of authors who span
domain boundaries, and summarize it with diversity, cluster and citation
indicators.
"""
from __future__ import annotations

__version__ = "0.1.0"


from .analysis import (
    BuildParams,
    RegressionFit,
    WindowRow,
    WindowSpec,
    correlate,
    cumulative_gerd,
    fit_linear,
    load_gerd_series,
    windowed_series,
    windows,
)
from .corpus import (
    AuthorEntry,
    CitationLink,
    Corpus,
    PublicationRecord,
    clean_corpus,
    ingest_records,
    is_cited,
)
from .delineation import (
    DomainQuery,
    ExpansionConfig,
    ExpansionTrace,
    candidate_keywords,
    expand_query,
    match_publication,
    retrieve,
    using_normalizer,
)
from .graph import (
    CoauthorshipFilters,
    CoauthorshipGraph,
    author_key,
    avg_collaborators,
    betweenness,
    boundary_spanning,
    build_coauthorship,
    connected_components,
    density,
    intersect,
)
from .indicators import (
    IntersectionPartition,
    citation_impact,
    entropy_diversity,
    n_clusters_50,
    partition_intersections,
    self_citation_rate,
    variance_diversity,
)
from .taxonomy import (
    FieldMap,
    GeoConfig,
    OrganizationRegistry,
    classify_collaboration,
    count_contributions,
    regional_intensity,
)
from .text import normalize_text

