"""Repair and canonicalize raw scientific names before they are queried.

The convention enforced is the one of the nomenclature codes: a
capitalized genus followed by lowercase epithets.  Hybrid markers are
rewritten to the ``×`` symbol attached to the following epithet
(``"Citrus ×aurantium"``).
"""

from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum

from taxonomy_owl.exceptions import MalformedNameError
from taxonomy_owl.models import Rank

logger = logging.getLogger(__name__)

HYBRID_MARKER = "×"
_ASCII_MARKERS = frozenset({"x", "X"})

_RANK_BY_TOKENS = {1: Rank.GENUS, 2: Rank.SPECIES, 3: Rank.SUBSPECIES}


class Repair(Enum):
    """Changes :func:`normalize` may apply, in the order they are reported."""

    TRIMMED = "TRIMMED"
    RECAPITALIZED = "RECAPITALIZED"
    HYBRID_NORMALIZED = "HYBRID_NORMALIZED"


@dataclass(frozen=True, slots=True)
class RawNameEntry:
    """A name as supplied by the user, with an optional rank annotation.

    Attributes:
        raw_text: Name text exactly as read.
        rank_hint: Rank given alongside the name (``Species``, ``Genus`` ...).
    """

    raw_text: str
    rank_hint: Rank | None = None


@dataclass(frozen=True, slots=True)
class NormalizedName:
    """A name ready to be sent to the match endpoint.

    Attributes:
        canonical_text: Repaired name (``"Prochilodus cearensis"``).
        rank_hint: Given rank, or one inferred from the number of words.
        is_hybrid: ``True`` when the name carries a hybrid marker.
        repairs: Every change applied to the raw text.
    """

    canonical_text: str
    rank_hint: Rank | None = None
    is_hybrid: bool = False
    repairs: tuple[Repair, ...] = field(default=())

    @property
    def word_count(self) -> int:
        return len(self.canonical_text.split(" "))


def _infer_rank(word_count: int, hint: Rank | None) -> Rank | None:
    return hint if hint is not None else _RANK_BY_TOKENS.get(word_count)


def _check_word(word: str, raw: str) -> None:
    letters = word.replace("-", "")
    if not letters or not letters.isalpha() or word.startswith("-") or word.endswith("-"):
        raise MalformedNameError(f"{raw!r}: {word!r} is not a name word")


def normalize(entry: RawNameEntry) -> NormalizedName:
    """Repair *entry* to the genus-capitalized / epithet-lowercase convention.

    Args:
        entry: Raw name and optional rank hint.

    Returns:
        The repaired name with the list of applied repairs.

    Raises:
        MalformedNameError: If the name is empty after trimming or contains
            digits or punctuation other than hyphens and a hybrid marker.
    """
    raw = entry.raw_text
    collapsed = " ".join(raw.split())
    if not collapsed:
        raise MalformedNameError("name is empty")

    repairs: set[Repair] = set()
    if collapsed != raw:
        repairs.add(Repair.TRIMMED)

    tokens = collapsed.split(" ")
    words: list[tuple[str, bool]] = []
    pending_marker = False
    for i, token in enumerate(tokens):
        standalone = token == HYBRID_MARKER or (token in _ASCII_MARKERS and 0 < i < len(tokens) - 1)
        if standalone:
            if pending_marker or i == len(tokens) - 1:
                raise MalformedNameError(f"{raw!r}: misplaced hybrid marker")
            pending_marker = True
            repairs.add(Repair.HYBRID_NORMALIZED)
            continue
        attached = token.startswith(HYBRID_MARKER)
        word = token[1:] if attached else token
        if attached and pending_marker:
            raise MalformedNameError(f"{raw!r}: doubled hybrid marker")
        _check_word(word, raw)
        words.append((word, attached or pending_marker))
        pending_marker = False

    parts: list[str] = []
    for i, (word, marked) in enumerate(words):
        fixed = word[0].upper() + word[1:].lower() if i == 0 else word.lower()
        if fixed != word:
            repairs.add(Repair.RECAPITALIZED)
        parts.append(f"{HYBRID_MARKER}{fixed}" if marked else fixed)

    canonical = " ".join(parts)
    is_hybrid = any(marked for _, marked in words)
    ordered = tuple(r for r in Repair if r in repairs)
    if ordered:
        logger.debug("normalized %r -> %r (%s)", raw, canonical, ", ".join(r.value for r in ordered))
    return NormalizedName(
        canonical_text=canonical,
        rank_hint=_infer_rank(len(words), entry.rank_hint),
        is_hybrid=is_hybrid,
        repairs=ordered,
    )


def passthrough(entry: RawNameEntry) -> NormalizedName:
    """Wrap *entry* without repairing it (only outer whitespace is dropped).

    Raises:
        MalformedNameError: If the name is empty after trimming.
    """
    text = entry.raw_text.strip()
    if not text:
        raise MalformedNameError("name is empty")
    return NormalizedName(
        canonical_text=text,
        rank_hint=_infer_rank(len(text.split()), entry.rank_hint),
        is_hybrid=HYBRID_MARKER in text,
    )


def hybrid_candidates(name: NormalizedName) -> list[str]:
    """Query texts to try for *name*, most specific first.

    Non-hybrids yield only their canonical text.  Hybrids yield the
    ``×``-attached form first and the marker-free form second; the backbone
    spells hybrids both ways.
    """
    if not name.is_hybrid:
        return [name.canonical_text]
    bare = name.canonical_text.replace(HYBRID_MARKER, "")
    return [name.canonical_text] if bare == name.canonical_text else [name.canonical_text, bare]


def binomial(name: NormalizedName) -> NormalizedName | None:
    """Truncate a trinomial to its species binomial, or ``None`` if not a trinomial."""
    words = name.canonical_text.split(" ")
    if len(words) < 3:
        return None
    text = " ".join(words[:2])
    return NormalizedName(
        canonical_text=text,
        rank_hint=Rank.SPECIES,
        is_hybrid=HYBRID_MARKER in text,
        repairs=name.repairs,
    )


def parse_names(lines: Iterable[str]) -> list[RawNameEntry]:
    """Parse a names list: one name per line, ``#`` comments, optional tab + rank hint.

    Blank lines are skipped.

    Raises:
        ValueError: If a rank hint is not a supported rank.
    """
    entries: list[RawNameEntry] = []
    for lineno, line in enumerate(lines, start=1):
        text = line.split("#", 1)[0].rstrip("\r\n")
        if not text.strip():
            continue
        name, _, hint = text.partition("\t")
        try:
            rank = Rank.parse(hint) if hint.strip() else None
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
        entries.append(RawNameEntry(raw_text=name.strip(), rank_hint=rank))
    return entries
