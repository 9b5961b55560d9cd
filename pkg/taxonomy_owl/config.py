"""Run configuration: defaults < config file < environment < command-line flags."""

from __future__ import annotations

import dataclasses
import logging
import os
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from datetime import timedelta
from enum import Enum
from pathlib import Path
from typing import Any

from taxonomy_owl.builder import MatchPolicy
from taxonomy_owl.cache import CacheStore
from taxonomy_owl.client import GbifClient
from taxonomy_owl.emitter import DEFAULT_IRI_BASE, DEFAULT_LANG_TAG, EmitConfig
from taxonomy_owl.exceptions import ConfigError
from taxonomy_owl.transports import (
    DEFAULT_BASE_URL,
    CachingTransport,
    FixtureTransport,
    HttpTransport,
    Transport,
)

logger = logging.getLogger(__name__)

BASE_URL_ENV = "GBIF_BASE_URL"


class TransportMode(Enum):
    LIVE = "live"
    FIXTURES = "fixtures"
    CACHE_THROUGH = "cache-through"


@dataclass(frozen=True, slots=True)
class RunConfig:
    """Every setting of a CLI run, with its default.

    Attributes:
        names: Names given inline.
        names_file: File with one name per line.
        output: Where the OWL document (or fragment) is written.
        report: Where the CSV report is written; defaults next to *output*.
        base_url: Root URL of the GBIF API.
        iri_base: Prefix of class IRIs.
        lang_tag: Language tag of labels.
        fuzzy_threshold: Minimum confidence for fuzzy matches.
        allow_fuzzy: Accept fuzzy matches whatever their confidence.
        transport_mode: ``live``, ``fixtures`` or ``cache-through``.
        fixtures_dir: Recorded corpus replayed in ``fixtures`` mode.
        cache_dir: Response store used in ``cache-through`` mode.
        refresh: Bypass cached answers (they are still written back).
        max_age: Cache freshness bound; ``None`` never expires.
        parallelism: Concurrent name resolutions.
        emit_comments: Write rank/label banners above classes.
        timeout: HTTP timeout in seconds.
        normalize: Repair name capitalization and hybrid markers.
        property_iri_base: Prefix of object property IRIs in axioms.
    """

    names: tuple[str, ...] = ()
    names_file: Path | None = None
    output: Path | None = None
    report: Path | None = None
    base_url: str = DEFAULT_BASE_URL
    iri_base: str = DEFAULT_IRI_BASE
    lang_tag: str = DEFAULT_LANG_TAG
    fuzzy_threshold: int = 90
    allow_fuzzy: bool = False
    transport_mode: TransportMode = TransportMode.LIVE
    fixtures_dir: Path | None = None
    cache_dir: Path | None = None
    refresh: bool = False
    max_age: timedelta | None = None
    parallelism: int = 4
    emit_comments: bool = False
    timeout: float = 30.0
    normalize: bool = True
    property_iri_base: str = field(default="")

    def __post_init__(self) -> None:
        if self.parallelism < 1:
            raise ConfigError("parallelism must be at least 1")
        if not 0 <= self.fuzzy_threshold <= 100:
            raise ConfigError("fuzzy_threshold must be between 0 and 100")
        if self.transport_mode is TransportMode.FIXTURES and self.fixtures_dir is None:
            raise ConfigError("fixtures mode needs a fixtures directory")
        if self.transport_mode is TransportMode.CACHE_THROUGH and self.cache_dir is None:
            raise ConfigError("cache-through mode needs a cache directory")

    @property
    def has_single_input(self) -> bool:
        return bool(self.names) != (self.names_file is not None)

    @property
    def report_path(self) -> Path | None:
        if self.report is not None:
            return self.report
        return self.output.with_suffix(".report.csv") if self.output is not None else None

    def emit_config(self) -> EmitConfig:
        return EmitConfig(
            iri_base=self.iri_base,
            lang_tag=self.lang_tag,
            emit_comments=self.emit_comments,
            property_iri_base=self.property_iri_base,
        )

    def policy(self) -> MatchPolicy:
        return MatchPolicy(fuzzy_threshold=self.fuzzy_threshold, allow_fuzzy=self.allow_fuzzy)

    def make_transport(self) -> Transport:
        if self.transport_mode is TransportMode.FIXTURES:
            assert self.fixtures_dir is not None
            if not self.fixtures_dir.is_dir():
                raise ConfigError(f"fixtures directory {self.fixtures_dir} does not exist")
            return FixtureTransport(self.fixtures_dir)
        live = HttpTransport(self.base_url, timeout=self.timeout, pool_size=self.parallelism)
        if self.transport_mode is TransportMode.CACHE_THROUGH:
            assert self.cache_dir is not None
            return CachingTransport(CacheStore(self.cache_dir), live, max_age=self.max_age, refresh=self.refresh)
        return live

    def make_client(self) -> GbifClient:
        return GbifClient(transport=self.make_transport())


# ----------------------------------------------------------------------
# Loading
# ----------------------------------------------------------------------


def _to_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in {"1", "true", "yes", "on"}:
        return True
    if lowered in {"0", "false", "no", "off"}:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _to_max_age(text: str) -> timedelta | None:
    lowered = text.strip().lower()
    if lowered in {"", "inf", "infinite", "none"}:
        return None
    return timedelta(seconds=float(lowered))


def _to_names(text: str) -> tuple[str, ...]:
    return tuple(name.strip() for name in text.split(",") if name.strip())


_COERCERS: dict[str, Callable[[str], Any]] = {
    "names": _to_names,
    "names_file": Path,
    "output": Path,
    "report": Path,
    "fuzzy_threshold": int,
    "allow_fuzzy": _to_bool,
    "transport_mode": TransportMode,
    "fixtures_dir": Path,
    "cache_dir": Path,
    "refresh": _to_bool,
    "max_age": _to_max_age,
    "parallelism": int,
    "emit_comments": _to_bool,
    "timeout": float,
    "normalize": _to_bool,
}

_ALIASES = {"transport": "transport_mode", "lang": "lang_tag", "comments": "emit_comments"}
FIELD_NAMES = frozenset(f.name for f in dataclasses.fields(RunConfig))


def _field_name(key: str) -> str:
    name = key.strip().lower().replace("-", "_")
    name = _ALIASES.get(name, name)
    if name not in FIELD_NAMES:
        raise ConfigError(f"unknown configuration key {key!r}")
    return name


def read_config_file(path: str | Path) -> dict[str, Any]:
    """Read ``key = value`` lines (``#`` comments) into typed field values.

    Raises:
        ConfigError: If the file is unreadable, a line has no ``=``, a key is
            unknown or a value does not parse.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc

    values: dict[str, Any] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        name = _field_name(key)
        try:
            values[name] = _COERCERS.get(name, str)(raw.strip())
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {name}: {exc}") from exc
    return values


def load_config(
    config_file: str | Path | None = None,
    overrides: Mapping[str, Any] | None = None,
    environ: Mapping[str, str] | None = None,
) -> RunConfig:
    """Assemble a :class:`RunConfig` from its sources.

    Precedence, lowest first: defaults, *config_file*, ``GBIF_BASE_URL`` in
    *environ*, *overrides* (command-line flags; ``None`` values are
    ignored).  Without an explicit ``transport_mode`` the mode follows the
    directories given: fixtures, else cache-through, else live.

    Raises:
        ConfigError: On bad files, unknown keys or invalid combinations.
    """
    environ = os.environ if environ is None else environ
    values: dict[str, Any] = read_config_file(config_file) if config_file is not None else {}
    if environ.get(BASE_URL_ENV):
        values["base_url"] = environ[BASE_URL_ENV]
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        values[_field_name(key)] = value

    if "transport_mode" not in values:
        if values.get("fixtures_dir") is not None:
            values["transport_mode"] = TransportMode.FIXTURES
        elif values.get("cache_dir") is not None:
            values["transport_mode"] = TransportMode.CACHE_THROUGH
    elif isinstance(values["transport_mode"], str):
        try:
            values["transport_mode"] = TransportMode(values["transport_mode"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    logger.debug("run configuration: %s", values)
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
