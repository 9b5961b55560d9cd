"""Tests for the live, fixture and cache-through transports."""

from __future__ import annotations

from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest
import requests
import responses
from responses.registries import OrderedRegistry

from taxonomy_owl.cache import CacheEntry, CacheStore
from taxonomy_owl.exceptions import GbifConnectionError, GbifFixtureMissingError, GbifTimeoutError, GbifTransportError
from taxonomy_owl.transports import CachingTransport, FixtureTransport, HttpTransport
from tests.conftest import GBIF_FIXTURES, StubTransport

BASE = "https://api.gbif.org/v1"


# ------------------------------------------------------------------ #
# HttpTransport
# ------------------------------------------------------------------ #


class TestHttpTransport:
    def test_base_url_gets_trailing_slash(self):
        assert HttpTransport(BASE).base_url == BASE + "/"

    @responses.activate
    def test_ok(self):
        responses.get(f"{BASE}/species/1", body=b'{"key": 1}')
        resp = HttpTransport(BASE, attempts=1).fetch("species/1")
        assert resp.status == 200
        assert resp.body == b'{"key": 1}'
        assert resp.from_cache is False
        assert resp.fetched_at is not None

    @responses.activate
    def test_404_passes_through(self):
        responses.get(f"{BASE}/species/42", status=404)
        assert HttpTransport(BASE, attempts=1).fetch("species/42").status == 404

    @responses.activate
    def test_client_error_raises(self):
        responses.get(f"{BASE}/species/match", status=400)
        with pytest.raises(GbifTransportError, match="400"):
            HttpTransport(BASE, attempts=1).fetch("species/match?name=")

    @responses.activate
    def test_connection_error(self):
        responses.get(f"{BASE}/species/1", body=requests.ConnectionError("refused"))
        with pytest.raises(GbifConnectionError, match="refused"):
            HttpTransport(BASE, attempts=1).fetch("species/1")

    @responses.activate
    def test_timeout(self):
        responses.get(f"{BASE}/species/1", body=requests.Timeout("slow"))
        with pytest.raises(GbifTimeoutError):
            HttpTransport(BASE, attempts=1).fetch("species/1")

    @responses.activate(registry=OrderedRegistry)
    def test_retries_server_errors(self):
        responses.get(f"{BASE}/species/1", status=503)
        responses.get(f"{BASE}/species/1", status=502)
        responses.get(f"{BASE}/species/1", body=b'{"key": 1}')
        resp = HttpTransport(BASE, attempts=3, backoff_factor=0).fetch("species/1")
        assert resp.status == 200
        assert resp.body == b'{"key": 1}'

    def test_closes_own_session_only(self, monkeypatch: pytest.MonkeyPatch):
        closed: list[bool] = []
        session = requests.Session()
        monkeypatch.setattr(session, "close", lambda: closed.append(True))
        HttpTransport(BASE, session=session).close()
        assert closed == []


# ------------------------------------------------------------------ #
# FixtureTransport
# ------------------------------------------------------------------ #


class TestFixtureTransport:
    def test_replays_recorded_body(self):
        resp = FixtureTransport(GBIF_FIXTURES).fetch("species/1")
        assert resp.from_cache is True
        assert b'"Animalia"' in resp.body
        assert resp.fetched_at == datetime(2025, 3, 6, tzinfo=timezone.utc)

    def test_missing_key(self):
        with pytest.raises(GbifFixtureMissingError, match="species/424242"):
            FixtureTransport(GBIF_FIXTURES).fetch("species/424242")


# ------------------------------------------------------------------ #
# CachingTransport
# ------------------------------------------------------------------ #


class TestCachingTransport:
    @pytest.fixture()
    def upstream(self) -> StubTransport:
        return StubTransport().add("species/1", {"key": 1})

    def test_miss_then_hit(self, tmp_path: Path, upstream: StubTransport):
        transport = CachingTransport(CacheStore(tmp_path), upstream)
        first = transport.fetch("species/1")
        second = transport.fetch("species/1")
        assert first.from_cache is False
        assert second.from_cache is True
        assert second.body == first.body
        assert upstream.calls == ["species/1"]
        assert (transport.hits, transport.misses) == (1, 1)

    def test_answers_survive_a_new_store(self, tmp_path: Path, upstream: StubTransport):
        CachingTransport(CacheStore(tmp_path), upstream).fetch("species/1")
        offline = FixtureTransport(tmp_path)
        assert offline.fetch("species/1").body == b'{"key": 1}'

    def test_refresh_bypasses_reads(self, tmp_path: Path, upstream: StubTransport):
        store = CacheStore(tmp_path)
        store.put(CacheEntry("species/1", b"stale", datetime(2020, 1, 1, tzinfo=timezone.utc)))
        resp = CachingTransport(store, upstream, refresh=True).fetch("species/1")
        assert resp.body == b'{"key": 1}'
        assert store.get("species/1").body == b'{"key": 1}'  # type: ignore[union-attr]

    def test_max_age_refetches_old_entries(self, tmp_path: Path, upstream: StubTransport):
        store = CacheStore(tmp_path)
        store.put(CacheEntry("species/1", b"old", datetime.now(timezone.utc) - timedelta(days=2)))
        transport = CachingTransport(store, upstream, max_age=timedelta(days=1))
        assert transport.fetch("species/1").body == b'{"key": 1}'
        assert upstream.calls == ["species/1"]

    def test_404_is_cached(self, tmp_path: Path):
        upstream = StubTransport().add("species/9", b"", status=404)
        transport = CachingTransport(CacheStore(tmp_path), upstream)
        transport.fetch("species/9")
        assert transport.fetch("species/9").status == 404
        assert upstream.calls == ["species/9"]

    def test_upstream_failure_not_cached(self, tmp_path: Path):
        store = CacheStore(tmp_path)
        with pytest.raises(GbifFixtureMissingError):
            CachingTransport(store, StubTransport()).fetch("species/1")
        assert len(store) == 0
