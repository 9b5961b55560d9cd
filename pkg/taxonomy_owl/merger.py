"""Read OWL documents in the emitter's RDF/XML dialect and merge them.

Merging fragments produced one species at a time repeats every shared
ancestor; :func:`merge` folds them into one class per IRI with
deduplicated labels and ``subClassOf`` edges.
"""

from __future__ import annotations

import logging
import re
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from lxml import etree

from taxonomy_owl.emitter import OWL_NS, RDF_NS, RDFS_NS, XML_NS, OwlClass, OwlDocument, is_absolute_iri
from taxonomy_owl.exceptions import LabelConflictError, MalformedXmlError, ParentCycleError, UnknownDialectError

logger = logging.getLogger(__name__)

_RDF_ROOT = f"{{{RDF_NS}}}RDF"
_OWL_CLASS = f"{{{OWL_NS}}}Class"
_RDFS_LABEL = f"{{{RDFS_NS}}}label"
_RDFS_SUBCLASS = f"{{{RDFS_NS}}}subClassOf"
_RDF_ABOUT = f"{{{RDF_NS}}}about"
_RDF_RESOURCE = f"{{{RDF_NS}}}resource"
_XML_LANG = f"{{{XML_NS}}}lang"

_TRAILING_KEY = re.compile(r"(\d+)$")


@dataclass(frozen=True, slots=True)
class ParsedClass:
    iri: str
    labels: tuple[tuple[str, str], ...] = ()
    parents: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class ParsedFragment:
    """Classes read from one document, in document order.

    Attributes:
        classes: One entry per ``owl:Class`` element.
        source_name: File name (or other label) used in diagnostics.
    """

    classes: tuple[ParsedClass, ...]
    source_name: str = "<string>"

    def edges(self) -> set[tuple[str, str]]:
        return {(cls.iri, parent) for cls in self.classes for parent in cls.parents}


def _qname(element: etree._Element) -> str:
    return etree.QName(element).localname if isinstance(element.tag, str) else repr(element)


def _children(element: etree._Element) -> Iterable[etree._Element]:
    # Comments and processing instructions carry no class data.
    return (child for child in element if isinstance(child.tag, str))


def parse(document: str | bytes, source_name: str = "<string>") -> ParsedFragment:
    """Parse an RDF/XML OWL document written in the emitter's dialect.

    Raises:
        MalformedXmlError: If *document* is not well-formed XML.
        UnknownDialectError: If it uses elements outside ``rdf:RDF``,
            ``owl:Class``, ``rdfs:label`` and ``rdfs:subClassOf``.
    """
    data = document.encode("utf-8") if isinstance(document, str) else document
    parser = etree.XMLParser(resolve_entities=False, no_network=True, remove_comments=True)
    try:
        root = etree.fromstring(data, parser)
    except etree.XMLSyntaxError as exc:
        raise MalformedXmlError(f"{source_name}: {exc}") from exc

    if root.tag != _RDF_ROOT:
        raise UnknownDialectError(f"{source_name}: root element is {_qname(root)}, not rdf:RDF", line=root.sourceline)

    classes: list[ParsedClass] = []
    for element in _children(root):
        if element.tag != _OWL_CLASS:
            raise UnknownDialectError(f"{source_name}: unsupported element {_qname(element)}", line=element.sourceline)
        classes.append(_parse_class(element, source_name))
    logger.debug("parsed %d classes from %s", len(classes), source_name)
    return ParsedFragment(classes=tuple(classes), source_name=source_name)


def _parse_class(element: etree._Element, source_name: str) -> ParsedClass:
    iri = element.get(_RDF_ABOUT)
    if not iri or not is_absolute_iri(iri):
        raise UnknownDialectError(f"{source_name}: owl:Class needs an absolute rdf:about", line=element.sourceline)

    labels: list[tuple[str, str]] = []
    parents: list[str] = []
    for child in _children(element):
        if child.tag == _RDFS_LABEL and not len(child):
            labels.append((child.text or "", child.get(_XML_LANG, "")))
        elif child.tag == _RDFS_SUBCLASS and child.get(_RDF_RESOURCE) and not len(child):
            parent = child.get(_RDF_RESOURCE)
            assert parent is not None
            if not is_absolute_iri(parent):
                raise UnknownDialectError(f"{source_name}: {parent!r} is not an absolute IRI", line=child.sourceline)
            parents.append(parent)
        else:
            raise UnknownDialectError(
                f"{source_name}: unsupported content {_qname(child)} in class {iri}", line=child.sourceline
            )
    return ParsedClass(iri=iri, labels=tuple(labels), parents=tuple(parents))


def parse_file(path: str | Path) -> ParsedFragment:
    """Parse the document at *path*, naming it by its path in diagnostics."""
    path = Path(path)
    return parse(path.read_bytes(), source_name=str(path))


def parse_files(paths: Sequence[str | Path], parallelism: int = 4) -> list[ParsedFragment]:
    """Parse several documents concurrently; results keep the order of *paths*."""
    with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
        return list(pool.map(parse_file, paths))


# ----------------------------------------------------------------------
# Merge
# ----------------------------------------------------------------------


def iri_sort_key(iri: str) -> tuple[int, int, str]:
    """Order IRIs by their trailing usage key; IRIs without one sort last."""
    found = _TRAILING_KEY.search(iri)
    return (0, int(found.group(1)), iri) if found else (1, 0, iri)


def merge(fragments: Sequence[ParsedFragment]) -> OwlDocument:
    """Fold *fragments* into one document with one class per IRI.

    Labels are unioned and deduplicated by ``(text, lang)``; parent edges
    are unioned.  Parents referenced but never declared become label-less
    placeholder classes (logged as warnings).  Classes are ordered by the
    usage key at the end of their IRI, since ranks are not recorded in OWL.

    Raises:
        LabelConflictError: If one IRI has two texts for the same language.
        ParentCycleError: If the merged edges form a cycle.
    """
    labels: dict[str, dict[str, tuple[str, str]]] = {}
    parents: dict[str, set[str]] = {}

    for fragment in fragments:
        for cls in fragment.classes:
            by_lang = labels.setdefault(cls.iri, {})
            for text, lang in cls.labels:
                seen = by_lang.get(lang)
                if seen is None:
                    by_lang[lang] = (text, fragment.source_name)
                elif seen[0] != text:
                    raise LabelConflictError(
                        f"{cls.iri} is labelled {seen[0]!r}@{lang} in {seen[1]} "
                        f"but {text!r}@{lang} in {fragment.source_name}",
                        sources=(seen[1], fragment.source_name),
                    )
            parents.setdefault(cls.iri, set()).update(cls.parents)

    for iri in sorted({p for ps in parents.values() for p in ps} - labels.keys(), key=iri_sort_key):
        logger.warning("%s is referenced as a parent but never declared; adding a placeholder class", iri)
        labels[iri] = {}
        parents[iri] = set()

    _check_acyclic(parents)

    classes = tuple(
        OwlClass(
            iri=iri,
            labels=tuple(sorted((text, lang) for lang, (text, _) in labels[iri].items())),
            parents=tuple(sorted(parents[iri], key=iri_sort_key)),
        )
        for iri in sorted(labels, key=iri_sort_key)
    )
    return OwlDocument(classes=classes)


def _check_acyclic(parents: dict[str, set[str]]) -> None:
    state: dict[str, int] = {}  # 1 = on the current path, 2 = done

    for start in sorted(parents):
        if state.get(start):
            continue
        stack: list[tuple[str, list[str]]] = [(start, sorted(parents.get(start, ())))]
        path = [start]
        state[start] = 1
        while stack:
            node, pending = stack[-1]
            if not pending:
                stack.pop()
                path.pop()
                state[node] = 2
                continue
            nxt = pending.pop()
            if state.get(nxt) == 1:
                cycle = path[path.index(nxt):] + [nxt]
                raise ParentCycleError("subClassOf cycle: " + " -> ".join(cycle))
            if not state.get(nxt):
                state[nxt] = 1
                path.append(nxt)
                stack.append((nxt, sorted(parents.get(nxt, ()))))
