"""Data models for GBIF species API responses."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum, IntEnum


class Rank(IntEnum):
    """Taxonomic ranks handled by the backbone ingestion, highest first.

    The integer value is the depth in the hierarchy, so a *higher* rank
    compares *smaller*: ``Rank.KINGDOM < Rank.SPECIES``.
    """

    KINGDOM = 1
    PHYLUM = 2
    CLASS = 3
    ORDER = 4
    FAMILY = 5
    GENUS = 6
    SPECIES = 7
    SUBSPECIES = 8

    @classmethod
    def parse(cls, text: str) -> Rank:
        """Parse a GBIF rank string (``"SPECIES"``) or a hint (``"Species"``).

        Raises:
            ValueError: If *text* names a rank outside the supported set.
        """
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"unsupported rank: {text!r}") from None

    @property
    def title(self) -> str:
        return self.name.capitalize()

    @property
    def name_field(self) -> str:
        """Field holding this rank's name in a GBIF response (``"class"``)."""
        return self.name.lower()

    @property
    def key_field(self) -> str:
        """Field holding this rank's usage key in a GBIF response (``"classKey"``)."""
        return f"{self.name.lower()}Key"


#: Ranks GBIF reports as named classification fields on a match or record.
CLASSIFICATION_RANKS: tuple[Rank, ...] = (
    Rank.KINGDOM,
    Rank.PHYLUM,
    Rank.CLASS,
    Rank.ORDER,
    Rank.FAMILY,
    Rank.GENUS,
    Rank.SPECIES,
)


class TaxonomicStatus(Enum):
    """Backbone status of a name usage.

    ``OTHER`` stands in for vocabulary added to the backbone after this
    release; the raw text is kept next to it on the model.
    """

    ACCEPTED = "ACCEPTED"
    SYNONYM = "SYNONYM"
    DOUBTFUL = "DOUBTFUL"
    OTHER = "OTHER"

    @classmethod
    def parse(cls, text: str) -> TaxonomicStatus:
        # GBIF records spell synonyms out ("HETEROTYPIC_SYNONYM", "PROPARTE_SYNONYM")
        if text.endswith("SYNONYM"):
            return cls.SYNONYM
        try:
            return cls(text)
        except ValueError:
            return cls.OTHER


class MatchType(Enum):
    """How the match endpoint paired the query with a backbone name."""

    EXACT = "EXACT"
    FUZZY = "FUZZY"
    HIGHERRANK = "HIGHERRANK"
    NONE = "NONE"
    OTHER = "OTHER"

    @classmethod
    def parse(cls, text: str) -> MatchType:
        try:
            return cls(text)
        except ValueError:
            return cls.OTHER


@dataclass(frozen=True, slots=True)
class TaxonMatch:
    """Decoded answer of ``GET species/match``.

    For accepted names ``rank_keys[rank] == usage_key``.  For synonyms GBIF
    reports the classification of the *accepted* taxon in the rank fields,
    and ``accepted_usage_key``/``species_name`` point at it.

    Attributes:
        usage_key: Backbone identifier of the matched name usage.
        scientific_name: Name with authorship (``"Apis mellifera Linnaeus, 1758"``).
        canonical_name: Name without authorship (``"Apis mellifera"``).
        rank: Rank of the matched usage.
        status: Backbone status of the matched usage.
        confidence: Match confidence, 0–100.
        match_type: ``EXACT``, ``FUZZY``, ``HIGHERRANK`` (or ``OTHER``).
        synonym: ``True`` exactly when ``status`` is ``SYNONYM``.
        rank_names: Classification names keyed by rank.
        rank_keys: Classification usage keys keyed by rank.
        accepted_usage_key: Accepted taxon of a synonym.
        species_name: Accepted species name when the match is a synonym.
        status_raw: Status text as sent by the API.
        match_type_raw: Match type text as sent by the API.
        note: Free-text explanation GBIF attaches to the match.
    """

    usage_key: int
    scientific_name: str
    canonical_name: str
    rank: Rank
    status: TaxonomicStatus
    confidence: int
    match_type: MatchType
    synonym: bool
    rank_names: Mapping[Rank, str] = field(default_factory=dict)
    rank_keys: Mapping[Rank, int] = field(default_factory=dict)
    accepted_usage_key: int | None = None
    species_name: str | None = None
    status_raw: str = ""
    match_type_raw: str = ""
    note: str = ""


@dataclass(frozen=True, slots=True)
class TaxonRecord:
    """Decoded answer of ``GET species/{key}`` (or one synonyms-page entry).

    Attributes:
        key: Backbone usage key.
        scientific_name: Name with authorship.
        canonical_name: Name without authorship.
        rank: Rank of the usage.
        taxonomic_status: Backbone status of the usage.
        parent_key: Usage key of the direct parent, absent for kingdoms.
        vernacular_name: Common name, when the backbone has one.
        num_descendants: Number of descendant usages.
        accepted_key: Accepted taxon of a synonym record.
        authorship: Authorship string (``"Linnaeus, 1758"``).
        rank_names: Classification names keyed by rank.
        rank_keys: Classification usage keys keyed by rank.
        status_raw: Status text as sent by the API.
    """

    key: int
    scientific_name: str
    canonical_name: str
    rank: Rank
    taxonomic_status: TaxonomicStatus
    parent_key: int | None = None
    vernacular_name: str | None = None
    num_descendants: int | None = None
    accepted_key: int | None = None
    authorship: str = ""
    rank_names: Mapping[Rank, str] = field(default_factory=dict)
    rank_keys: Mapping[Rank, int] = field(default_factory=dict)
    status_raw: str = ""
