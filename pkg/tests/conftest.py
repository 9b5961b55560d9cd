"""Shared test fixtures."""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any

import pytest

from taxonomy_owl.client import GbifClient, match_request_key, synonyms_request_key, taxon_request_key
from taxonomy_owl.exceptions import GbifFixtureMissingError
from taxonomy_owl.transports import FixtureTransport, Transport, TransportResponse

FIXTURES = Path(__file__).resolve().parent / "fixtures"
GBIF_FIXTURES = FIXTURES / "gbif"
GOLDEN = FIXTURES / "golden"
NAMES = FIXTURES / "names"

APIS_MATCH: dict[str, Any] = {
    "usageKey": 1341976,
    "scientificName": "Apis mellifera Linnaeus, 1758",
    "canonicalName": "Apis mellifera",
    "rank": "SPECIES",
    "status": "ACCEPTED",
    "confidence": 99,
    "matchType": "EXACT",
    "kingdom": "Animalia",
    "phylum": "Arthropoda",
    "order": "Hymenoptera",
    "family": "Apidae",
    "genus": "Apis",
    "species": "Apis mellifera",
    "kingdomKey": 1,
    "phylumKey": 54,
    "classKey": 216,
    "orderKey": 1457,
    "familyKey": 4334,
    "genusKey": 1334757,
    "speciesKey": 1341976,
    "synonym": False,
    "class": "Insecta",
}

NO_MATCH: dict[str, Any] = {"confidence": 100, "note": "No name matches", "matchType": "NONE", "synonym": False}


class StubTransport(Transport):
    """In-memory transport answering from a dict of request key -> (status, JSON)."""

    def __init__(self) -> None:
        self.responses: dict[str, tuple[int, bytes]] = {}
        self.calls: list[str] = []
        self._lock = threading.Lock()

    def add(self, request_key: str, body: Any, status: int = 200) -> StubTransport:
        data = body if isinstance(body, bytes) else json.dumps(body).encode()
        self.responses[request_key] = (status, data)
        return self

    def add_match(self, name: str, body: dict[str, Any]) -> StubTransport:
        return self.add(match_request_key(name), body)

    def add_taxon(self, key: int, body: dict[str, Any], status: int = 200) -> StubTransport:
        return self.add(taxon_request_key(key), body, status)

    def add_synonyms(self, key: int, results: list[dict[str, Any]], end: bool = True) -> StubTransport:
        return self.add(synonyms_request_key(key), {"offset": 0, "limit": 20, "endOfRecords": end, "results": results})

    def fetch(self, request_key: str) -> TransportResponse:
        with self._lock:
            self.calls.append(request_key)
        if request_key not in self.responses:
            raise GbifFixtureMissingError(f"no stubbed response for {request_key!r}")
        status, body = self.responses[request_key]
        return TransportResponse(request_key=request_key, status=status, body=body)


@pytest.fixture()
def stub() -> StubTransport:
    return StubTransport()


@pytest.fixture()
def stub_client(stub: StubTransport) -> GbifClient:
    return GbifClient(transport=stub)


@pytest.fixture()
def fixture_client() -> GbifClient:
    """Client replaying the recorded GBIF corpus."""
    return GbifClient(transport=FixtureTransport(GBIF_FIXTURES))


@pytest.fixture()
def apis_match() -> dict[str, Any]:
    return dict(APIS_MATCH)


def record(key: int, name: str, rank: str, status: str = "ACCEPTED", **fields: Any) -> dict[str, Any]:
    """A ``species/{key}`` body with the given classification fields."""
    body: dict[str, Any] = {
        "key": key,
        "scientificName": name,
        "canonicalName": name,
        "rank": rank,
        "taxonomicStatus": status,
    }
    body.update(fields)
    return body
