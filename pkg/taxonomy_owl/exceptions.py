"""Exception hierarchy for taxonomy-owl."""

from __future__ import annotations


class TaxonomyOwlError(Exception):
    """Base exception for all taxonomy-owl errors."""


# ----------------------------------------------------------------------
# GBIF client
# ----------------------------------------------------------------------


class GbifError(TaxonomyOwlError):
    """Base exception for errors raised while talking to the GBIF species API."""


class GbifNoMatchError(GbifError):
    """Raised when the match endpoint answers ``matchType=NONE``.

    Also raised when the match endpoint itself answers HTTP 404.
    """


class GbifNotFoundError(GbifError):
    """Raised when a usage key does not exist in the backbone.

    Corresponds to HTTP 404, or to a non-positive key that is never sent.
    """


class GbifTransportError(GbifError):
    """Raised when a response could not be obtained at all."""


class GbifConnectionError(GbifTransportError):
    """Raised when the GBIF API server is unreachable."""


class GbifTimeoutError(GbifTransportError):
    """Raised when a request to the GBIF API times out."""


class GbifFixtureMissingError(GbifTransportError):
    """Raised when a replayed fixture corpus has no recording for a request."""


class GbifDecodeError(GbifError):
    """Raised when a response body lacks required fields or is not JSON."""


# ----------------------------------------------------------------------
# Names and resolution
# ----------------------------------------------------------------------


class MalformedNameError(TaxonomyOwlError):
    """Raised for names that are empty or contain digits or stray punctuation."""


class ResolutionError(TaxonomyOwlError):
    """Base exception for matches that cannot become an accepted taxon."""


class UnresolvableSynonymError(ResolutionError):
    """Raised when a synonym carries no reference to its accepted taxon."""


class LowConfidenceError(ResolutionError):
    """Raised when a fuzzy match is below the configured confidence threshold."""


class HigherRankMatchError(ResolutionError):
    """Raised when the backbone only matched an ancestor of the queried name."""


class LabelConflictError(TaxonomyOwlError):
    """Raised when one identifier is given two different labels.

    In a taxonomy graph this signals a stale cache or fixture drift; in a
    merge it names both source fragments.
    """

    def __init__(self, message: str, *, sources: tuple[str, ...] = ()) -> None:
        super().__init__(message)
        self.sources = sources


# ----------------------------------------------------------------------
# OWL documents
# ----------------------------------------------------------------------


class UnresolvedTargetError(TaxonomyOwlError):
    """Raised when an axiom subject or target cannot be resolved to a class IRI."""

    def __init__(self, message: str, *, line: int | None = None) -> None:
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class MalformedXmlError(TaxonomyOwlError):
    """Raised when an OWL document is not well-formed XML."""


class UnknownDialectError(TaxonomyOwlError):
    """Raised for elements outside the supported RDF/XML vocabulary."""

    def __init__(self, message: str, *, line: int | None = None) -> None:
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class ParentCycleError(TaxonomyOwlError):
    """Raised when merged ``rdfs:subClassOf`` edges form a cycle."""


# ----------------------------------------------------------------------
# Cache and configuration
# ----------------------------------------------------------------------


class CacheStoreError(TaxonomyOwlError):
    """Raised when the response cache cannot be read or written."""


class ConfigError(TaxonomyOwlError):
    """Raised for unreadable config files, unknown keys or bad values."""
