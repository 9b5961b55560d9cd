"""taxonomy-owl: turn species names into an OWL class hierarchy via the GBIF backbone."""

from taxonomy_owl.builder import (
    ConversionReport,
    MatchPolicy,
    Outcome,
    ReportEntry,
    ResolvedTaxon,
    TaxonomyBuilder,
    TaxonomyGraph,
    TaxonNode,
    accumulate,
    build,
    resolve_accepted,
)
from taxonomy_owl.cache import CacheEntry, CacheStore
from taxonomy_owl.client import GbifClient
from taxonomy_owl.emitter import AxiomKind, EmitConfig, OwlClass, OwlDocument, RestrictionAxiom, emit, emit_axioms
from taxonomy_owl.exceptions import (
    CacheStoreError,
    ConfigError,
    GbifConnectionError,
    GbifDecodeError,
    GbifError,
    GbifFixtureMissingError,
    GbifNoMatchError,
    GbifNotFoundError,
    GbifTimeoutError,
    GbifTransportError,
    HigherRankMatchError,
    LabelConflictError,
    LowConfidenceError,
    MalformedNameError,
    MalformedXmlError,
    ParentCycleError,
    ResolutionError,
    TaxonomyOwlError,
    UnknownDialectError,
    UnresolvableSynonymError,
    UnresolvedTargetError,
)
from taxonomy_owl.merger import merge, parse
from taxonomy_owl.models import MatchType, Rank, TaxonMatch, TaxonomicStatus, TaxonRecord
from taxonomy_owl.names import NormalizedName, RawNameEntry, normalize
from taxonomy_owl.transports import CachingTransport, FixtureTransport, HttpTransport, Transport

__all__ = [
    "GbifClient",
    "Transport",
    "HttpTransport",
    "FixtureTransport",
    "CachingTransport",
    "CacheStore",
    "CacheEntry",
    "Rank",
    "TaxonomicStatus",
    "MatchType",
    "TaxonMatch",
    "TaxonRecord",
    "RawNameEntry",
    "NormalizedName",
    "normalize",
    "MatchPolicy",
    "ResolvedTaxon",
    "TaxonNode",
    "TaxonomyGraph",
    "ReportEntry",
    "ConversionReport",
    "Outcome",
    "TaxonomyBuilder",
    "resolve_accepted",
    "accumulate",
    "build",
    "EmitConfig",
    "OwlClass",
    "OwlDocument",
    "AxiomKind",
    "RestrictionAxiom",
    "emit",
    "emit_axioms",
    "parse",
    "merge",
    "main",
    "TaxonomyOwlError",
    "GbifError",
    "GbifNoMatchError",
    "GbifNotFoundError",
    "GbifTransportError",
    "GbifConnectionError",
    "GbifTimeoutError",
    "GbifFixtureMissingError",
    "GbifDecodeError",
    "MalformedNameError",
    "ResolutionError",
    "UnresolvableSynonymError",
    "LowConfidenceError",
    "HigherRankMatchError",
    "LabelConflictError",
    "UnresolvedTargetError",
    "MalformedXmlError",
    "UnknownDialectError",
    "ParentCycleError",
    "CacheStoreError",
    "ConfigError",
]


def __getattr__(name: str) -> object:
    """Lazy-import the CLI so ``click`` is only loaded when it is used."""
    if name == "main":
        from taxonomy_owl.cli import main

        return main
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
