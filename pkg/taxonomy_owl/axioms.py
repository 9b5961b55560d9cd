"""Axiom spec files: restriction axioms written with species names.

One axiom per line::

    Citrus ×aurantium | some-intersection | is_a_hybrid_of | Citrus maxima, Citrus reticulata

Fields are ``subject | kind | property | targets``.  Subjects and targets
are either absolute IRIs (used as they are) or names, which are resolved
through the conversion pipeline to the class IRI of their accepted taxon.
Blank lines and ``#`` comments are skipped.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass

from taxonomy_owl.builder import TaxonomyBuilder
from taxonomy_owl.emitter import AxiomKind, EmitConfig, RestrictionAxiom, is_absolute_iri
from taxonomy_owl.exceptions import TaxonomyOwlError, UnresolvedTargetError
from taxonomy_owl.names import RawNameEntry

logger = logging.getLogger(__name__)

_KIND_ALIASES = {
    "some-intersection": AxiomKind.SOME_VALUES_INTERSECTION,
    "exactly-1": AxiomKind.EXACT_CARDINALITY_1,
    "some": AxiomKind.SOME_VALUES_SINGLE,
}


def parse_kind(text: str) -> AxiomKind:
    """Map ``some-intersection`` / ``exactly-1`` / ``some`` (or an enum name) to an :class:`AxiomKind`.

    Raises:
        ValueError: If *text* names no kind.
    """
    cleaned = text.strip()
    kind = _KIND_ALIASES.get(cleaned.lower())
    if kind is not None:
        return kind
    try:
        return AxiomKind[cleaned.upper()]
    except KeyError:
        raise ValueError(f"unknown axiom kind {text!r}") from None


@dataclass(frozen=True, slots=True)
class AxiomSpec:
    """One parsed spec line, names not yet resolved."""

    line: int
    subject: str
    kind: AxiomKind
    property_name: str
    targets: tuple[str, ...]


def parse_axiom_spec(lines: Iterable[str]) -> list[AxiomSpec]:
    """Parse spec lines into :class:`AxiomSpec` records.

    Raises:
        ValueError: If a line does not have four ``|``-separated fields, the
            kind is unknown or a field is empty.  The message starts with the
            line number.
    """
    specs: list[AxiomSpec] = []
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        fields = [part.strip() for part in text.split("|")]
        if len(fields) != 4:
            raise ValueError(f"line {lineno}: expected 'subject | kind | property | targets'")
        subject, kind_text, prop, target_text = fields
        targets = tuple(t.strip() for t in target_text.split(",") if t.strip())
        if not subject or not prop or not targets:
            raise ValueError(f"line {lineno}: subject, property and targets must not be empty")
        try:
            kind = parse_kind(kind_text)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
        specs.append(AxiomSpec(lineno, subject, kind, prop, targets))
    return specs


def resolve_axioms(
    specs: Sequence[AxiomSpec],
    resolve_name: Callable[[str], str],
) -> list[RestrictionAxiom]:
    """Turn *specs* into :class:`RestrictionAxiom` objects.

    Args:
        specs: Parsed spec lines.
        resolve_name: Maps a name to a class IRI, raising a
            :class:`TaxonomyOwlError` when it cannot.

    Raises:
        UnresolvedTargetError: If a name does not resolve or a line's
            target count does not fit its kind; carries the line number.
    """
    resolved: dict[str, str] = {}

    def iri_for(term: str, line: int) -> str:
        if is_absolute_iri(term):
            return term
        if term not in resolved:
            try:
                resolved[term] = resolve_name(term)
            except TaxonomyOwlError as exc:
                raise UnresolvedTargetError(f"cannot resolve {term!r}: {exc}", line=line) from exc
            logger.debug("axiom term %r -> %s", term, resolved[term])
        return resolved[term]

    axioms: list[RestrictionAxiom] = []
    for spec in specs:
        subject = iri_for(spec.subject, spec.line)
        targets = tuple(iri_for(target, spec.line) for target in spec.targets)
        try:
            axioms.append(RestrictionAxiom(subject, spec.kind, spec.property_name, targets))
        except ValueError as exc:
            raise UnresolvedTargetError(str(exc), line=spec.line) from exc
    return axioms


def name_resolver(builder: TaxonomyBuilder, config: EmitConfig) -> Callable[[str], str]:
    """Resolve names with *builder* and turn accepted keys into class IRIs."""

    def resolve(name: str) -> str:
        taxon = builder.resolve(RawNameEntry(name))
        return config.class_iri(taxon.accepted_key)

    return resolve
