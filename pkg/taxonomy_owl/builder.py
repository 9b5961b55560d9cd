"""Resolve names to accepted taxa and accumulate one deduplicated taxonomy graph."""

from __future__ import annotations

import logging
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum

from taxonomy_owl.client import GbifClient
from taxonomy_owl.exceptions import (
    GbifNoMatchError,
    GbifNotFoundError,
    GbifTransportError,
    HigherRankMatchError,
    LabelConflictError,
    LowConfidenceError,
    ResolutionError,
    TaxonomyOwlError,
    UnresolvableSynonymError,
)
from taxonomy_owl.models import CLASSIFICATION_RANKS, MatchType, Rank, TaxonMatch, TaxonomicStatus, TaxonRecord
from taxonomy_owl.names import (
    NormalizedName,
    RawNameEntry,
    Repair,
    binomial,
    hybrid_candidates,
    normalize,
    passthrough,
)

logger = logging.getLogger(__name__)


class Resolution(Enum):
    """Path taken from a match to its accepted taxon."""

    ACCEPTED = "ACCEPTED"
    SYNONYM_REPLACED = "SYNONYM_REPLACED"
    FUZZY_MATCHED = "FUZZY_MATCHED"


class Outcome(Enum):
    """Per-name result recorded in a :class:`ConversionReport`."""

    ACCEPTED = "ACCEPTED"
    SYNONYM_REPLACED = "SYNONYM_REPLACED"
    FUZZY_MATCHED = "FUZZY_MATCHED"
    FAILED = "FAILED"


@dataclass(frozen=True, slots=True)
class MatchPolicy:
    """Which matches are acceptable.

    Attributes:
        fuzzy_threshold: Minimum confidence for a FUZZY match.
        allow_fuzzy: Accept FUZZY matches whatever their confidence.
        max_synonym_hops: How many synonym-of-synonym links may be followed.
    """

    fuzzy_threshold: int = 90
    allow_fuzzy: bool = False
    max_synonym_hops: int = 3


@dataclass(frozen=True, slots=True)
class ChainLink:
    rank: Rank
    name: str
    key: int


@dataclass(frozen=True, slots=True)
class ResolvedTaxon:
    """An input name resolved to its accepted taxon.

    Attributes:
        input_name: Query text that produced the match.
        accepted_name: Canonical name of the accepted taxon.
        accepted_key: Usage key of the accepted taxon.
        chain: Classification from kingdom down to the accepted taxon.
        resolution: Whether the name was accepted, replaced or fuzzy-matched.
        original_match: The match the resolution started from.
        notes: Gaps and other remarks for the report.
    """

    input_name: str
    accepted_name: str
    accepted_key: int
    chain: tuple[ChainLink, ...]
    resolution: Resolution
    original_match: TaxonMatch
    notes: tuple[str, ...] = ()

    @property
    def rank(self) -> Rank:
        return self.chain[-1].rank


@dataclass(frozen=True, slots=True)
class TaxonNode:
    key: int
    label: str
    rank: Rank
    parent_key: int | None = None


@dataclass
class TaxonomyGraph:
    """Rank-ordered tree of taxa, one node per usage key.

    Equality compares nodes and parent links only.
    """

    nodes: dict[int, TaxonNode] = field(default_factory=dict)
    replaced_names: dict[int, set[str]] = field(default_factory=dict, compare=False)

    @property
    def roots(self) -> set[int]:
        return {key for key, node in self.nodes.items() if node.parent_key is None}

    def edges(self) -> set[tuple[int, int]]:
        """``(child, parent)`` pairs."""
        return {(key, node.parent_key) for key, node in self.nodes.items() if node.parent_key is not None}

    def children(self, key: int) -> list[int]:
        return sorted(k for k, node in self.nodes.items() if node.parent_key == key)

    def leaves(self) -> set[int]:
        parents = {node.parent_key for node in self.nodes.values()}
        return set(self.nodes) - parents

    def ancestors(self, key: int) -> list[TaxonNode]:
        """Nodes above *key*, nearest first."""
        path: list[TaxonNode] = []
        parent = self.nodes[key].parent_key
        while parent is not None:
            node = self.nodes[parent]
            path.append(node)
            parent = node.parent_key
        return path

    def ordered(self) -> list[TaxonNode]:
        """Nodes sorted rank-major, key-minor."""
        return sorted(self.nodes.values(), key=lambda n: (n.rank, n.key))

    def add_chain(self, chain: Sequence[ChainLink]) -> None:
        """Insert every link of *chain* once, linking each to its predecessor.

        Raises:
            ValueError: If *chain* is empty or not strictly rank-descending.
            LabelConflictError: If a key is already present with another label or rank.
        """
        if not chain:
            raise ValueError("chain is empty")
        if any(a.rank >= b.rank for a, b in zip(chain, chain[1:])):
            raise ValueError("chain ranks must strictly descend")

        known: dict[int, tuple[str, Rank]] = {}
        for link in chain:
            node = self.nodes.get(link.key)
            label, rank = known.get(link.key) or ((node.label, node.rank) if node else (link.name, link.rank))
            if (label, rank) != (link.name, link.rank):
                raise LabelConflictError(
                    f"usage key {link.key} is {rank.title} {label!r} but also {link.rank.title} {link.name!r}"
                )
            known[link.key] = (label, rank)

        # Nothing is written until the whole chain is known to fit.
        parent: int | None = None
        for link in chain:
            existing = self.nodes.get(link.key)
            if existing is None:
                self.nodes[link.key] = TaxonNode(link.key, link.name, link.rank, parent)
            else:
                nearer = self._nearer_parent(existing.parent_key, parent)
                if nearer != existing.parent_key:
                    self.nodes[link.key] = replace(existing, parent_key=nearer)
            parent = link.key

    def check(self) -> None:
        """Verify the graph's structural invariants.

        Raises:
            ValueError: If a parent is missing or not of a strictly higher rank.
        """
        for node in self.nodes.values():
            if node.parent_key is None:
                continue
            parent = self.nodes.get(node.parent_key)
            if parent is None:
                raise ValueError(f"{node.key} has missing parent {node.parent_key}")
            if parent.rank >= node.rank:
                raise ValueError(f"{node.key} ({node.rank.title}) is under {parent.key} ({parent.rank.title})")

    def _nearer_parent(self, current: int | None, candidate: int | None) -> int | None:
        # Only differs when one backbone classification skips a rank.
        if current is None or candidate is None:
            return current if candidate is None else candidate
        a, b = self.nodes[current], self.nodes[candidate]
        return min((a, b), key=lambda n: (-n.rank, n.key)).key

    def __len__(self) -> int:
        return len(self.nodes)

    def __contains__(self, key: object) -> bool:
        return key in self.nodes


@dataclass(frozen=True, slots=True)
class ReportEntry:
    """One row of a :class:`ConversionReport`."""

    input_name: str
    outcome: Outcome
    detail: str = ""
    normalized: str = ""
    status: str = ""
    match_type: str = ""
    confidence: int | None = None
    accepted_name: str = ""
    accepted_key: int | None = None


@dataclass
class ConversionReport:
    """Outcome of every input name, in input order."""

    entries: list[ReportEntry] = field(default_factory=list)

    @property
    def counts(self) -> Counter[Outcome]:
        return Counter(entry.outcome for entry in self.entries)

    @property
    def failed(self) -> list[ReportEntry]:
        return [entry for entry in self.entries if entry.outcome is Outcome.FAILED]

    @property
    def ok(self) -> bool:
        return not self.failed

    def __len__(self) -> int:
        return len(self.entries)


# ----------------------------------------------------------------------
# Resolution
# ----------------------------------------------------------------------


def _chain(
    names: Mapping[Rank, str],
    keys: Mapping[Rank, int],
    own: ChainLink,
) -> tuple[tuple[ChainLink, ...], tuple[str, ...]]:
    links = [ChainLink(r, names[r], keys[r]) for r in CLASSIFICATION_RANKS if r < own.rank and r in keys]
    links = [link for link in links if link.key != own.key]
    missing = [r.title for r in CLASSIFICATION_RANKS if r < own.rank and r not in keys]
    notes = (f"backbone classification has no {', '.join(missing).lower()}",) if missing else ()
    return (*links, own), notes


def _chain_from_record(record: TaxonRecord) -> tuple[tuple[ChainLink, ...], tuple[str, ...]]:
    return _chain(record.rank_names, record.rank_keys, ChainLink(record.rank, record.canonical_name, record.key))


def _check_acceptable(match: TaxonMatch, policy: MatchPolicy) -> None:
    if match.match_type is MatchType.NONE:
        raise ValueError("a NONE match cannot be resolved")
    if match.match_type is MatchType.HIGHERRANK:
        raise HigherRankMatchError(f"only a higher rank matched: {match.rank.title} {match.canonical_name}")
    if match.match_type is MatchType.OTHER:
        raise ResolutionError(f"unsupported match type {match.match_type_raw!r}")
    if match.match_type is MatchType.FUZZY and not policy.allow_fuzzy and match.confidence < policy.fuzzy_threshold:
        raise LowConfidenceError(
            f"fuzzy match to {match.canonical_name!r} has confidence {match.confidence} "
            f"< {policy.fuzzy_threshold}"
        )


def _follow_synonym(match: TaxonMatch, client: GbifClient, policy: MatchPolicy) -> TaxonRecord | None:
    accepted_key = match.accepted_usage_key
    if accepted_key is None and match.species_name and Rank.SPECIES in match.rank_keys:
        accepted_key = match.rank_keys[Rank.SPECIES]
    if accepted_key is None:
        raise UnresolvableSynonymError(f"{match.canonical_name!r} is a synonym without an accepted name")

    try:
        record = client.get_taxon(accepted_key)
    except GbifNotFoundError:
        logger.warning("accepted usage %d of %s not found; using the match classification", accepted_key,
                       match.canonical_name)
        return None

    hops = 0
    while record.taxonomic_status is TaxonomicStatus.SYNONYM:
        hops += 1
        if record.accepted_key is None or hops > policy.max_synonym_hops:
            raise UnresolvableSynonymError(f"synonym chain from {match.canonical_name!r} does not end in an accepted name")
        record = client.get_taxon(record.accepted_key)
    if record.taxonomic_status is not TaxonomicStatus.ACCEPTED:
        logger.warning("accepted name %s of %s has status %s", record.canonical_name, match.canonical_name,
                       record.status_raw)
    return record


def resolve_accepted(
    match: TaxonMatch,
    client: GbifClient,
    policy: MatchPolicy | None = None,
    input_name: str | None = None,
) -> ResolvedTaxon:
    """Turn *match* into the accepted taxon and its classification chain.

    Accepted (and doubtful) matches keep their own classification.  For a
    synonym the accepted taxon is fetched through ``acceptedUsageKey`` and
    only its classification is used; the match's species fields are the
    fallback when the accepted record is missing.

    Raises:
        HigherRankMatchError: If only an ancestor of the name matched.
        LowConfidenceError: If a fuzzy match is below the policy threshold.
        UnresolvableSynonymError: If a synonym has no usable accepted reference.
    """
    policy = policy or MatchPolicy()
    _check_acceptable(match, policy)
    input_name = input_name or match.canonical_name

    if not match.synonym:
        own = ChainLink(match.rank, match.canonical_name, match.usage_key)
        chain, notes = _chain(match.rank_names, match.rank_keys, own)
        resolution = Resolution.FUZZY_MATCHED if match.match_type is MatchType.FUZZY else Resolution.ACCEPTED
        return ResolvedTaxon(input_name, own.name, own.key, chain, resolution, match, notes)

    record = _follow_synonym(match, client, policy)
    if record is not None:
        chain, notes = _chain_from_record(record)
    else:
        # Synonym match fields describe the accepted classification.
        keys = dict(match.rank_keys)
        target = match.accepted_usage_key or keys.get(Rank.SPECIES)
        cut = next((r for r in CLASSIFICATION_RANKS if keys.get(r) == target), None)
        if cut is None:
            raise UnresolvableSynonymError(f"accepted usage {target} of {match.canonical_name!r} is unknown")
        chain, notes = _chain(match.rank_names, keys, ChainLink(cut, match.rank_names[cut], keys[cut]))

    resolution = Resolution.FUZZY_MATCHED if match.match_type is MatchType.FUZZY else Resolution.SYNONYM_REPLACED
    accepted = chain[-1]
    return ResolvedTaxon(input_name, accepted.name, accepted.key, chain, resolution, match, notes)


def accumulate(taxon: ResolvedTaxon, graph: TaxonomyGraph) -> TaxonomyGraph:
    """Add *taxon*'s chain to *graph* and return it.

    Re-adding a present key with the same label is a no-op.

    Raises:
        LabelConflictError: If a key is already present with another label.
    """
    graph.add_chain(taxon.chain)
    if taxon.resolution is not Resolution.ACCEPTED and taxon.original_match.synonym:
        graph.replaced_names.setdefault(taxon.accepted_key, set()).add(taxon.original_match.canonical_name)
    return graph


# ----------------------------------------------------------------------
# Batch
# ----------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class _Attempt:
    entry: RawNameEntry
    normalized: NormalizedName | None = None
    query: str = ""
    taxon: ResolvedTaxon | None = None
    match: TaxonMatch | None = None
    error: TaxonomyOwlError | None = None
    notes: tuple[str, ...] = ()


def _match_first(client: GbifClient, candidates: Iterable[str]) -> tuple[str, TaxonMatch]:
    last: GbifNoMatchError | None = None
    for query in candidates:
        try:
            return query, client.match_name(query)
        except GbifNoMatchError as exc:
            last = exc
    assert last is not None
    raise last


class TaxonomyBuilder:
    """Runs the name → match → accepted taxon → graph pipeline over a batch.

    Args:
        client: GBIF client (any transport).
        policy: Match acceptance policy.
        parallelism: Maximum concurrent name resolutions.
        normalize_names: Repair names before querying; ``False`` sends the
            trimmed raw text.
    """

    def __init__(
        self,
        client: GbifClient,
        policy: MatchPolicy | None = None,
        parallelism: int = 4,
        normalize_names: bool = True,
    ) -> None:
        if parallelism < 1:
            raise ValueError("parallelism must be at least 1")
        self._client = client
        self._policy = policy or MatchPolicy()
        self._parallelism = parallelism
        self._normalize = normalize_names

    def resolve(self, entry: RawNameEntry) -> ResolvedTaxon:
        """Resolve one name, raising on failure."""
        attempt = self._attempt(entry)
        if attempt.error is not None:
            raise attempt.error
        assert attempt.taxon is not None
        return attempt.taxon

    def match(self, entry: RawNameEntry) -> tuple[NormalizedName, str, TaxonMatch, tuple[str, ...]]:
        """Normalize *entry* and find its first matching query form.

        Hybrids try every :func:`hybrid_candidates` form; trinomials that do
        not match are retried as binomials.

        Returns:
            ``(normalized, query, match, notes)``.

        Raises:
            MalformedNameError: If the name cannot be normalized.
            GbifNoMatchError: If no form matches.
        """
        norm = normalize(entry) if self._normalize else passthrough(entry)
        notes: list[str] = []
        if Repair.RECAPITALIZED in norm.repairs:
            notes.append(f"recapitalized to {norm.canonical_text}")
        species = binomial(norm) if norm.rank_hint is Rank.SUBSPECIES or norm.word_count >= 3 else None
        try:
            query, match = _match_first(self._client, hybrid_candidates(norm))
        except GbifNoMatchError:
            if species is None:
                raise
        else:
            # HIGHERRANK stays a failure unless the binomial fallback applies.
            if match.match_type is not MatchType.HIGHERRANK or species is None:
                return norm, query, match, tuple(notes)

        assert species is not None
        logger.warning("%s did not match; retrying as %s", norm.canonical_text, species.canonical_text)
        query, match = _match_first(self._client, hybrid_candidates(species))
        notes.append(f"downgraded to species {species.canonical_text}")
        return norm, query, match, tuple(notes)

    def build(self, names: Sequence[RawNameEntry]) -> tuple[TaxonomyGraph, ConversionReport]:
        """Resolve every name and accumulate the graph.

        Failures of single names never abort the batch; they become FAILED
        report entries.

        Raises:
            ValueError: If *names* is empty.
            GbifTransportError: If no lookup obtained any response, i.e. the
                transport is unusable.
        """
        if not names:
            raise ValueError("no names to convert")

        with ThreadPoolExecutor(max_workers=self._parallelism) as pool:
            attempts = list(pool.map(self._attempt, names))

        errors = [attempt.error for attempt in attempts]
        if all(isinstance(error, GbifTransportError) for error in errors):
            raise GbifTransportError(f"no GBIF response for any of {len(names)} names: {errors[-1]}") from errors[-1]

        graph = TaxonomyGraph()
        report = ConversionReport()
        for attempt in attempts:
            if attempt.taxon is not None:
                try:
                    accumulate(attempt.taxon, graph)
                except LabelConflictError as exc:
                    attempt = replace(attempt, taxon=None, error=exc)
            entry = _report_entry(attempt)
            report.entries.append(entry)
            log = logger.warning if entry.outcome in (Outcome.FAILED, Outcome.FUZZY_MATCHED) else logger.info
            log("%s: %s %s", entry.input_name, entry.outcome.value, entry.detail)
        return graph, report

    def _attempt(self, entry: RawNameEntry) -> _Attempt:
        try:
            norm, query, match, notes = self.match(entry)
        except TaxonomyOwlError as exc:
            return _Attempt(entry, query=self._display_text(entry), error=exc)
        try:
            taxon = resolve_accepted(match, self._client, self._policy, input_name=query)
        except TaxonomyOwlError as exc:
            return _Attempt(entry, norm, query, None, match, error=exc, notes=notes)
        return _Attempt(entry, norm, query, taxon, match, notes=notes + taxon.notes)

    def _display_text(self, entry: RawNameEntry) -> str:
        try:
            return (normalize(entry) if self._normalize else passthrough(entry)).canonical_text
        except TaxonomyOwlError:
            return ""


def build(
    names: Sequence[RawNameEntry],
    client: GbifClient,
    policy: MatchPolicy | None = None,
    *,
    parallelism: int = 4,
    normalize_names: bool = True,
) -> tuple[TaxonomyGraph, ConversionReport]:
    """Convert *names* into a deduplicated graph and a per-name report.

    See :class:`TaxonomyBuilder`.
    """
    builder = TaxonomyBuilder(client, policy, parallelism=parallelism, normalize_names=normalize_names)
    return builder.build(names)


def _report_entry(attempt: _Attempt) -> ReportEntry:
    match = attempt.match
    if match is not None:
        match_type = match.match_type_raw
    else:
        match_type = "NONE" if isinstance(attempt.error, GbifNoMatchError) else ""
    confidence = match.confidence if match is not None else None
    status = match.status_raw if match is not None else ""

    taxon = attempt.taxon
    if taxon is None:
        return ReportEntry(
            input_name=attempt.entry.raw_text,
            outcome=Outcome.FAILED,
            detail="; ".join((*attempt.notes, str(attempt.error))),
            normalized=attempt.query,
            status=status,
            match_type=match_type,
            confidence=confidence,
        )

    notes = list(attempt.notes)
    if taxon.original_match.synonym:
        notes.insert(0, f"{taxon.original_match.canonical_name} is a synonym of {taxon.accepted_name}")
    if taxon.resolution is Resolution.FUZZY_MATCHED:
        notes.insert(0, f"fuzzy match to {taxon.original_match.canonical_name}; review")
    return ReportEntry(
        input_name=attempt.entry.raw_text,
        outcome=Outcome(taxon.resolution.value),
        detail="; ".join(notes),
        normalized=attempt.query,
        status=status,
        match_type=match_type,
        confidence=confidence,
        accepted_name=taxon.accepted_name,
        accepted_key=taxon.accepted_key,
    )
