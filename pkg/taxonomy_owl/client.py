"""Typed client for the GBIF species API."""

from __future__ import annotations

import json
import logging
from collections.abc import Mapping
from typing import Any
from urllib.parse import quote, urlencode

from taxonomy_owl.exceptions import GbifDecodeError, GbifNoMatchError, GbifNotFoundError
from taxonomy_owl.models import (
    CLASSIFICATION_RANKS,
    MatchType,
    Rank,
    TaxonMatch,
    TaxonomicStatus,
    TaxonRecord,
)
from taxonomy_owl.transports import DEFAULT_BASE_URL, HttpTransport, Transport, TransportResponse

logger = logging.getLogger(__name__)


def match_request_key(name: str) -> str:
    """Request key of the match endpoint for *name* (``species/match?name=Apis%20mellifera``)."""
    return "species/match?" + urlencode({"name": name}, quote_via=quote)


def taxon_request_key(key: int) -> str:
    return f"species/{key}"


def synonyms_request_key(key: int) -> str:
    return f"species/{key}/synonyms"


class GbifClient:
    """Client for the ``species`` endpoints of the GBIF API.

    Only decoding lives here; whether a synonym or a fuzzy match is
    acceptable is decided by the taxonomy builder.  The client keeps no
    per-request state and may be shared between worker threads.

    Args:
        base_url: Root URL of the GBIF API, used when *transport* is omitted.
        timeout: Request timeout in seconds, used when *transport* is omitted.
        transport: Where responses come from (live, fixtures, cache-through).

    Example::

        client = GbifClient()
        match = client.match_name("Apis mellifera")
        print(match.usage_key, match.status)
    """

    def __init__(
        self,
        base_url: str = DEFAULT_BASE_URL,
        timeout: float = 30,
        transport: Transport | None = None,
    ) -> None:
        self._transport = transport or HttpTransport(base_url, timeout=timeout)

    @property
    def transport(self) -> Transport:
        return self._transport

    def match_name(self, name: str) -> TaxonMatch:
        """Match a normalized scientific name against the backbone.

        Args:
            name: Normalized scientific name (see :func:`taxonomy_owl.names.normalize`).

        Returns:
            The decoded :class:`TaxonMatch`; synonyms and fuzzy matches are
            returned as such.

        Raises:
            GbifNoMatchError: If the backbone has no match for *name*.
            GbifTransportError: If no response could be obtained.
            GbifDecodeError: If the response lacks required fields.
        """
        if not name.strip():
            raise ValueError("name must not be empty")
        resp = self._transport.fetch(match_request_key(name))
        if resp.status == 404:
            raise GbifNoMatchError(f"no match for {name!r}")
        data = _load_object(resp)
        return _decode_match(data, name)

    def get_taxon(self, key: int) -> TaxonRecord:
        """Fetch the full record of a usage key.

        Raises:
            GbifNotFoundError: If *key* does not exist.
            GbifTransportError: If no response could be obtained.
            GbifDecodeError: If the response lacks required fields.
        """
        if key <= 0:
            raise GbifNotFoundError(f"usage key must be positive, got {key}")
        resp = self._transport.fetch(taxon_request_key(key))
        if resp.status == 404:
            raise GbifNotFoundError(f"usage key {key} not found")
        return _decode_record(_load_object(resp))

    def get_synonyms(self, key: int) -> list[TaxonRecord]:
        """Fetch the names the backbone records as synonyms of *key*.

        Only the first page of results is read (the API's default page
        size); a warning is logged when more pages exist.

        Raises:
            GbifNotFoundError: If *key* does not exist.
            GbifTransportError: If no response could be obtained.
            GbifDecodeError: If the response lacks required fields.
        """
        if key <= 0:
            raise GbifNotFoundError(f"usage key must be positive, got {key}")
        resp = self._transport.fetch(synonyms_request_key(key))
        if resp.status == 404:
            raise GbifNotFoundError(f"usage key {key} not found")
        data = _load_object(resp)
        results = data.get("results")
        if not isinstance(results, list):
            raise GbifDecodeError(f"{resp.request_key}: 'results' is not a list")
        if data.get("endOfRecords") is False:
            logger.warning("synonyms of %d span several pages; only the first %d were read", key, len(results))

        records: list[TaxonRecord] = []
        for raw in results:
            try:
                records.append(_decode_record(raw))
            except GbifDecodeError as exc:
                logger.warning("skipping synonym of %d: %s", key, exc)
        return records

    def close(self) -> None:
        self._transport.close()

    def __enter__(self) -> GbifClient:
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()


# ----------------------------------------------------------------------
# Decoding
# ----------------------------------------------------------------------


def _load_object(resp: TransportResponse) -> dict[str, Any]:
    try:
        data = json.loads(resp.body)
    except ValueError as exc:
        raise GbifDecodeError(f"{resp.request_key}: body is not JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise GbifDecodeError(f"{resp.request_key}: expected a JSON object")
    return data


def _require(data: Mapping[str, Any], field: str) -> Any:
    value = data.get(field)
    if value is None or value == "":
        raise GbifDecodeError(f"response is missing {field!r}")
    return value


def _positive_int(data: Mapping[str, Any], field: str) -> int:
    value = _require(data, field)
    if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
        raise GbifDecodeError(f"{field!r} is not a positive integer: {value!r}")
    return value


def _optional_positive_int(data: Mapping[str, Any], field: str) -> int | None:
    if data.get(field) is None:
        return None
    return _positive_int(data, field)


def _rank(data: Mapping[str, Any]) -> Rank:
    text = _require(data, "rank")
    try:
        return Rank.parse(text)
    except ValueError as exc:
        raise GbifDecodeError(str(exc)) from exc


def _classification(data: Mapping[str, Any]) -> tuple[dict[Rank, str], dict[Rank, int]]:
    names: dict[Rank, str] = {}
    keys: dict[Rank, int] = {}
    for rank in CLASSIFICATION_RANKS:
        name = data.get(rank.name_field)
        key = data.get(rank.key_field)
        if name is None and key is None:
            continue
        if not name or key is None:
            logger.debug("dropping half-present %s classification field", rank.name_field)
            continue
        names[rank] = name
        keys[rank] = _positive_int(data, rank.key_field)
    return names, keys


def _decode_match(data: Mapping[str, Any], query: str) -> TaxonMatch:
    match_type_raw = str(data.get("matchType", ""))
    match_type = MatchType.parse(match_type_raw)
    if match_type is MatchType.NONE:
        note = data.get("note") or "matchType NONE"
        raise GbifNoMatchError(f"no match for {query!r}: {note}")

    usage_key = _positive_int(data, "usageKey")
    scientific_name = _require(data, "scientificName")
    canonical_name = data.get("canonicalName") or scientific_name
    rank = _rank(data)
    status_raw = str(_require(data, "status"))
    status = TaxonomicStatus.parse(status_raw)
    synonym = status is TaxonomicStatus.SYNONYM
    if bool(data.get("synonym", synonym)) != synonym:
        logger.warning("%s: synonym flag disagrees with status %s; trusting status", query, status_raw)

    names, keys = _classification(data)
    if not synonym:
        if rank not in keys:
            names[rank] = canonical_name
            keys[rank] = usage_key
        elif keys[rank] != usage_key:
            raise GbifDecodeError(f"{query!r}: usageKey {usage_key} differs from {rank.key_field} {keys[rank]}")

    confidence = data.get("confidence", 0)
    if isinstance(confidence, bool) or not isinstance(confidence, int) or not 0 <= confidence <= 100:
        raise GbifDecodeError(f"{query!r}: confidence out of range: {confidence!r}")

    return TaxonMatch(
        usage_key=usage_key,
        scientific_name=scientific_name,
        canonical_name=canonical_name,
        rank=rank,
        status=status,
        confidence=confidence,
        match_type=match_type,
        synonym=synonym,
        rank_names=names,
        rank_keys=keys,
        accepted_usage_key=_optional_positive_int(data, "acceptedUsageKey"),
        species_name=data.get("species") if synonym else None,
        status_raw=status_raw,
        match_type_raw=match_type_raw,
        note=data.get("note") or "",
    )


def _decode_record(data: Mapping[str, Any]) -> TaxonRecord:
    key = _positive_int(data, "key")
    scientific_name = _require(data, "scientificName")
    status_raw = str(_require(data, "taxonomicStatus"))
    names, keys = _classification(data)
    num_descendants = data.get("numDescendants")
    if num_descendants is not None and (not isinstance(num_descendants, int) or num_descendants < 0):
        raise GbifDecodeError(f"numDescendants is not a non-negative integer: {num_descendants!r}")
    return TaxonRecord(
        key=key,
        scientific_name=scientific_name,
        canonical_name=data.get("canonicalName") or scientific_name,
        rank=_rank(data),
        taxonomic_status=TaxonomicStatus.parse(status_raw),
        parent_key=_optional_positive_int(data, "parentKey"),
        vernacular_name=data.get("vernacularName") or None,
        num_descendants=num_descendants,
        accepted_key=_optional_positive_int(data, "acceptedKey"),
        authorship=data.get("authorship") or "",
        rank_names=names,
        rank_keys=keys,
        status_raw=status_raw,
    )
