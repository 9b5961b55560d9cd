"""Integration tests against the live GBIF API.

These tests need network access. Run with::

    pytest -m integration

Configure the API root via the ``GBIF_BASE_URL`` environment variable
(default: ``https://api.gbif.org/v1/``).
"""

from __future__ import annotations

import os
from pathlib import Path

import pytest

from taxonomy_owl.builder import Outcome, build
from taxonomy_owl.cache import CacheStore
from taxonomy_owl.client import GbifClient
from taxonomy_owl.models import Rank
from taxonomy_owl.names import RawNameEntry
from taxonomy_owl.transports import CachingTransport, FixtureTransport, HttpTransport

pytestmark = pytest.mark.integration


@pytest.fixture(scope="module")
def base_url() -> str:
    return os.environ.get("GBIF_BASE_URL", "https://api.gbif.org/v1/")


@pytest.fixture(scope="module")
def client(base_url: str) -> GbifClient:
    return GbifClient(base_url, timeout=60)


class TestMatch:
    def test_apis_mellifera(self, client: GbifClient):
        match = client.match_name("Apis mellifera")
        assert match.usage_key == 1341976
        assert match.rank is Rank.SPECIES
        assert match.rank_keys[Rank.KINGDOM] == 1

    def test_capra_hircus_is_a_synonym(self, client: GbifClient):
        match = client.match_name("Capra hircus")
        assert match.synonym is True
        assert match.accepted_usage_key is not None

    def test_kingdom_record(self, client: GbifClient):
        assert client.get_taxon(1).canonical_name == "Animalia"


class TestBuild:
    def test_batch(self, client: GbifClient):
        names = [RawNameEntry(n) for n in ("Apis mellifera", "Bos taurus", "Prochilodus Cearensis")]
        graph, report = build(names, client)
        assert report.ok
        assert report.entries[2].outcome is Outcome.SYNONYM_REPLACED
        assert graph.roots == {1}


class TestRecordReplay:
    def test_cache_then_offline(self, base_url: str, tmp_path: Path):
        store = CacheStore(tmp_path)
        with GbifClient(transport=CachingTransport(store, HttpTransport(base_url))) as live:
            graph, _ = build([RawNameEntry("Apis mellifera")], live)
        offline = GbifClient(transport=FixtureTransport(tmp_path))
        replayed, _ = build([RawNameEntry("Apis mellifera")], offline)
        assert replayed == graph
