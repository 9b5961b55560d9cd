"""Pluggable transports that turn a request key into a raw GBIF response.

Three implementations share the :class:`Transport` interface:

* :class:`HttpTransport` talks to the live API through ``requests``.
* :class:`FixtureTransport` replays a recorded corpus and never touches
  the network.
* :class:`CachingTransport` consults a :class:`~taxonomy_owl.cache.CacheStore`
  first, falls back to an upstream transport and writes the answer back.
"""

from __future__ import annotations

import logging
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import requests
from requests.adapters import HTTPAdapter
from urllib3.util.retry import Retry

from taxonomy_owl.cache import CacheEntry, CacheStore
from taxonomy_owl.exceptions import (
    GbifConnectionError,
    GbifFixtureMissingError,
    GbifTimeoutError,
    GbifTransportError,
)

logger = logging.getLogger(__name__)

DEFAULT_BASE_URL = "https://api.gbif.org/v1/"

#: Statuses a transport hands back to the client instead of raising.
PASS_THROUGH_STATUSES = frozenset({200, 404})


@dataclass(frozen=True, slots=True)
class TransportResponse:
    """Raw answer to one request.

    Attributes:
        request_key: Path and query relative to the API base.
        status: HTTP status (only 200 and 404 reach the client).
        body: Raw response body.
        from_cache: ``True`` when the body came from a store, not the network.
        fetched_at: When the body was obtained from the network.
    """

    request_key: str
    status: int
    body: bytes
    from_cache: bool = False
    fetched_at: datetime | None = None


class Transport(ABC):
    """Fetches raw responses for request keys such as ``"species/1"``."""

    @abstractmethod
    def fetch(self, request_key: str) -> TransportResponse:
        """Return the response for *request_key*.

        Raises:
            GbifTransportError: If no response could be obtained.
        """

    def close(self) -> None:  # noqa: B027
        """Release held resources."""

    def __enter__(self) -> Transport:
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()


class HttpTransport(Transport):
    """Live transport over a pooled :class:`requests.Session`.

    Transport failures and 5xx answers are retried with exponential
    backoff; 4xx answers are never retried.

    Args:
        base_url: Root URL of the GBIF API.
        timeout: Per-request timeout in seconds.
        attempts: Total tries per request, first one included.
        backoff_factor: Base of the exponential backoff, in seconds.
        pool_size: Connection pool size; match it to the resolver parallelism.
        session: Optional pre-configured session (custom headers, proxies).
    """

    def __init__(
        self,
        base_url: str = DEFAULT_BASE_URL,
        timeout: float = 30,
        attempts: int = 3,
        backoff_factor: float = 0.5,
        pool_size: int = 4,
        session: requests.Session | None = None,
    ) -> None:
        self._base_url = base_url.rstrip("/") + "/"
        self._timeout = timeout
        self._owns_session = session is None
        self._session = session or requests.Session()
        retry = Retry(
            total=attempts - 1,
            backoff_factor=backoff_factor,
            status_forcelist=(500, 502, 503, 504),
            allowed_methods=frozenset({"GET"}),
            raise_on_status=False,
        )
        adapter = HTTPAdapter(max_retries=retry, pool_connections=pool_size, pool_maxsize=pool_size)
        self._session.mount("https://", adapter)
        self._session.mount("http://", adapter)
        self._session.headers.setdefault("Accept", "application/json")

    @property
    def base_url(self) -> str:
        return self._base_url

    def fetch(self, request_key: str) -> TransportResponse:
        url = f"{self._base_url}{request_key}"
        logger.debug("GET %s", url)
        try:
            resp = self._session.get(url, timeout=self._timeout)
        except requests.Timeout as exc:
            raise GbifTimeoutError(f"{url}: {exc}") from exc
        except requests.ConnectionError as exc:
            raise GbifConnectionError(f"{url}: {exc}") from exc
        except requests.RequestException as exc:
            raise GbifTransportError(f"{url}: {exc}") from exc

        if resp.status_code not in PASS_THROUGH_STATUSES:
            raise GbifTransportError(f"{url}: HTTP {resp.status_code} {resp.reason}")
        return TransportResponse(
            request_key=request_key,
            status=resp.status_code,
            body=resp.content,
            fetched_at=datetime.now(timezone.utc),
        )

    def close(self) -> None:
        if self._owns_session:
            self._session.close()


class FixtureTransport(Transport):
    """Replays responses recorded in a cache-store directory.

    Args:
        store: A :class:`CacheStore` or the path of its directory.
    """

    def __init__(self, store: CacheStore | str | Path) -> None:
        self._store = store if isinstance(store, CacheStore) else CacheStore(store)

    @property
    def store(self) -> CacheStore:
        return self._store

    def fetch(self, request_key: str) -> TransportResponse:
        entry = self._store.get(request_key)
        if entry is None:
            raise GbifFixtureMissingError(f"no recorded response for {request_key!r} in {self._store.directory}")
        return TransportResponse(
            request_key=request_key,
            status=entry.status,
            body=entry.body,
            from_cache=True,
            fetched_at=entry.fetched_at,
        )


class CachingTransport(Transport):
    """Cache-through transport: store first, then *upstream*, then write back.

    Args:
        store: Response store consulted and filled.
        upstream: Transport used on a miss (normally :class:`HttpTransport`).
        max_age: Freshness bound; ``None`` keeps entries forever.
        refresh: Bypass the store for reads (answers are still written back).
    """

    def __init__(
        self,
        store: CacheStore,
        upstream: Transport,
        max_age: timedelta | None = None,
        refresh: bool = False,
    ) -> None:
        self._store = store
        self._upstream = upstream
        self._max_age = max_age
        self._refresh = refresh
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0

    @property
    def store(self) -> CacheStore:
        return self._store

    def fetch(self, request_key: str) -> TransportResponse:
        if not self._refresh:
            entry = self._store.get(request_key, self._max_age)
            if entry is not None:
                with self._lock:
                    self.hits += 1
                logger.debug("cache hit %s", request_key)
                return TransportResponse(
                    request_key=request_key,
                    status=entry.status,
                    body=entry.body,
                    from_cache=True,
                    fetched_at=entry.fetched_at,
                )

        with self._lock:
            self.misses += 1
        logger.debug("cache miss %s", request_key)
        resp = self._upstream.fetch(request_key)
        self._store.put(
            CacheEntry(
                request_key=request_key,
                body=resp.body,
                fetched_at=resp.fetched_at or datetime.now(timezone.utc),
                status=resp.status,
            )
        )
        return resp

    def close(self) -> None:
        self._upstream.close()
