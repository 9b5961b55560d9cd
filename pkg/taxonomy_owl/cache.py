"""Durable on-disk store of GBIF API responses.

A store is one directory holding one body file per request plus an
append-only ``manifest.jsonl``.  The same layout serves as the offline
fixture corpus the test-suite replays.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
from collections.abc import Callable, Iterator
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path
from urllib.parse import quote

from taxonomy_owl.exceptions import CacheStoreError

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.jsonl"


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


def entry_filename(request_key: str) -> str:
    """Return the body filename for *request_key* (the key, percent-encoded)."""
    return quote(request_key, safe="")


@dataclass(frozen=True, slots=True)
class CacheEntry:
    """One recorded API response.

    Attributes:
        request_key: Path and query relative to the API base
            (``"species/match?name=Apis%20mellifera"``).
        body: Raw response bytes; may be empty.
        fetched_at: UTC time the response was obtained.
        status: HTTP status of the recorded response (200 or 404).
        backbone_note: Free text, e.g. which backbone snapshot answered.
    """

    request_key: str
    body: bytes
    fetched_at: datetime
    status: int = 200
    backbone_note: str | None = None


@dataclass(frozen=True, slots=True)
class _IndexRow:
    filename: str
    fetched_at: datetime
    status: int
    note: str | None


class CacheStore:
    """Directory-backed response store.

    Bodies are committed with write-then-rename before their manifest line
    is appended, and a replaced key gets a fresh body file, so the manifest
    append is the only commit point.  An interrupted writer leaves at worst
    an unreferenced body file and never a torn entry.  Appends from threads of one process
    are serialised; separate processes should write disjoint keys.

    Args:
        directory: Store directory; created when missing.
        clock: Source of "now" for freshness checks and default timestamps.

    Example::

        store = CacheStore("~/.cache/taxonomy-owl")
        entry = store.get("species/1")
    """

    def __init__(
        self,
        directory: str | Path,
        *,
        clock: Callable[[], datetime] = _utcnow,
    ) -> None:
        self._dir = Path(directory).expanduser()
        self._clock = clock
        self._lock = threading.Lock()
        try:
            self._dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise CacheStoreError(f"cannot create cache directory {self._dir}: {exc}") from exc
        self._index: dict[str, _IndexRow] = self._load_manifest()

    @property
    def directory(self) -> Path:
        return self._dir

    @property
    def manifest_path(self) -> Path:
        return self._dir / MANIFEST_NAME

    # ------------------------------------------------------------------
    # Public API
    # ------------------------------------------------------------------

    def get(self, request_key: str, max_age: timedelta | None = None) -> CacheEntry | None:
        """Return the entry for *request_key* if present and fresh.

        Args:
            request_key: Key the entry was stored under.
            max_age: Freshness bound; ``None`` means entries never expire.
                An entry is fresh while its age is strictly below *max_age*,
                so ``timedelta(0)`` never returns anything.

        Raises:
            CacheStoreError: If the body file cannot be read.
        """
        row = self._index.get(request_key)
        if row is None:
            return None
        if max_age is not None and self._clock() - row.fetched_at >= max_age:
            logger.debug("cache entry %s is stale", request_key)
            return None
        path = self._dir / row.filename
        try:
            body = path.read_bytes()
        except FileNotFoundError:
            logger.warning("cache manifest references missing body %s", path.name)
            return None
        except OSError as exc:
            raise CacheStoreError(f"cannot read {path}: {exc}") from exc
        return CacheEntry(
            request_key=request_key,
            body=body,
            fetched_at=row.fetched_at,
            status=row.status,
            backbone_note=row.note,
        )

    def put(self, entry: CacheEntry) -> None:
        """Store *entry*, replacing any entry with the same key.

        Raises:
            CacheStoreError: If the body or the manifest cannot be written.
        """
        fetched_at = entry.fetched_at
        fetched_at = (
            fetched_at.replace(tzinfo=timezone.utc) if fetched_at.tzinfo is None else fetched_at.astimezone(timezone.utc)
        )
        with self._lock:
            previous = self._index.get(entry.request_key)
            filename = self._body_filename(entry, previous)
            line = json.dumps(
                {
                    "key": entry.request_key,
                    "file": filename,
                    "fetchedAt": fetched_at.isoformat(),
                    "status": entry.status,
                    "note": entry.backbone_note,
                },
                ensure_ascii=False,
            )
            try:
                self._write_atomic(self._dir / filename, entry.body)
                with open(self.manifest_path, "a", encoding="utf-8") as fh:
                    fh.write(line + "\n")
                    fh.flush()
                    os.fsync(fh.fileno())
            except OSError as exc:
                raise CacheStoreError(f"cannot write cache entry {entry.request_key}: {exc}") from exc
            self._index[entry.request_key] = _IndexRow(filename, fetched_at, entry.status, entry.backbone_note)
            if previous is not None and previous.filename != filename:
                try:
                    (self._dir / previous.filename).unlink(missing_ok=True)
                except OSError as exc:
                    logger.warning("cannot remove superseded body %s: %s", previous.filename, exc)
        logger.debug("cached %s (%d bytes)", entry.request_key, len(entry.body))

    def keys(self) -> list[str]:
        """Return every stored request key, sorted."""
        return sorted(self._index)

    def oldest_fetched_at(self) -> datetime | None:
        return min((row.fetched_at for row in self._index.values()), default=None)

    def newest_fetched_at(self) -> datetime | None:
        return max((row.fetched_at for row in self._index.values()), default=None)

    def fetched_at(self, request_key: str) -> datetime | None:
        row = self._index.get(request_key)
        return row.fetched_at if row else None

    def clear(self) -> int:
        """Delete every entry and the manifest; return how many entries were removed."""
        with self._lock:
            removed = len(self._index)
            try:
                for row in self._index.values():
                    (self._dir / row.filename).unlink(missing_ok=True)
                self.manifest_path.unlink(missing_ok=True)
            except OSError as exc:
                raise CacheStoreError(f"cannot clear {self._dir}: {exc}") from exc
            self._index.clear()
        logger.info("cleared %d cache entries from %s", removed, self._dir)
        return removed

    def __len__(self) -> int:
        return len(self._index)

    def __contains__(self, request_key: object) -> bool:
        return request_key in self._index

    def __iter__(self) -> Iterator[str]:
        return iter(self.keys())

    # ------------------------------------------------------------------
    # Internal helpers
    # ------------------------------------------------------------------

    def _load_manifest(self) -> dict[str, _IndexRow]:
        index: dict[str, _IndexRow] = {}
        try:
            text = self.manifest_path.read_text(encoding="utf-8")
        except FileNotFoundError:
            return index
        except OSError as exc:
            raise CacheStoreError(f"cannot read {self.manifest_path}: {exc}") from exc

        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                fetched_at = datetime.fromisoformat(raw["fetchedAt"])
                if fetched_at.tzinfo is None:
                    fetched_at = fetched_at.replace(tzinfo=timezone.utc)
                row = _IndexRow(
                    filename=raw["file"],
                    fetched_at=fetched_at,
                    status=int(raw.get("status", 200)),
                    note=raw.get("note"),
                )
                key = raw["key"]
            except (ValueError, KeyError, TypeError):
                logger.warning("skipping unreadable manifest line %d in %s", lineno, self.manifest_path)
                continue
            index[key] = row
        return index

    @staticmethod
    def _body_filename(entry: CacheEntry, previous: _IndexRow | None) -> str:
        # A committed body is never rewritten with different bytes.
        base = entry_filename(entry.request_key)
        if previous is None:
            return base
        return f"{base}.{hashlib.sha256(entry.body).hexdigest()[:16]}"

    @staticmethod
    def _write_atomic(path: Path, data: bytes) -> None:
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp_name, path)
        except BaseException:
            Path(tmp_name).unlink(missing_ok=True)
            raise
