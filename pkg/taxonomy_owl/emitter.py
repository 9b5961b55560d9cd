"""Deterministic RDF/XML (OWL) serialization of taxonomy graphs.

Output is byte-stable: classes are ordered rank-major then key-minor,
attributes always come in the same order, indentation is four spaces and
lines end with ``\\n``.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from urllib.parse import urlparse
from xml.sax.saxutils import escape

from taxonomy_owl.builder import TaxonomyGraph
from taxonomy_owl.exceptions import UnresolvedTargetError

logger = logging.getLogger(__name__)

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
OWL_NS = "http://www.w3.org/2002/07/owl#"
XML_NS = "http://www.w3.org/XML/1998/namespace"

DEFAULT_IRI_BASE = "https://www.gbif.org/species/"
DEFAULT_LANG_TAG = "lat"

_HEADER = (
    f'<rdf:RDF xmlns:rdf="{RDF_NS}"',
    f'         xmlns:rdfs="{RDFS_NS}"',
    f'         xmlns:owl="{OWL_NS}">',
)
_FOOTER = "</rdf:RDF>"
_INDENT = "    "


@dataclass(frozen=True, slots=True)
class EmitConfig:
    """Serialization settings.

    Attributes:
        iri_base: Prefix joined with a usage key to form a class IRI.
        lang_tag: Language tag of every ``rdfs:label`` (``"la"`` for strict BCP-47).
        emit_comments: Write ``<!-- Rank Label -->`` banners above classes.
        property_iri_base: Prefix for object property IRIs in axioms.
    """

    iri_base: str = DEFAULT_IRI_BASE
    lang_tag: str = DEFAULT_LANG_TAG
    emit_comments: bool = False
    property_iri_base: str = ""

    def class_iri(self, key: int) -> str:
        return f"{self.iri_base}{key}"

    def property_iri(self, name: str) -> str:
        return self.property_iri_base + "_".join(name.split())


@dataclass(frozen=True, slots=True)
class OwlClass:
    """One ``owl:Class`` declaration.

    Attributes:
        iri: Value of ``rdf:about``.
        labels: ``(text, lang)`` pairs; empty for placeholder classes.
        parents: ``rdfs:subClassOf`` targets.
        comment: Banner text written when comments are enabled.
    """

    iri: str
    labels: tuple[tuple[str, str], ...] = ()
    parents: tuple[str, ...] = ()
    comment: str | None = None


class AxiomKind(Enum):
    SOME_VALUES_INTERSECTION = "SOME_VALUES_INTERSECTION"
    EXACT_CARDINALITY_1 = "EXACT_CARDINALITY_1"
    SOME_VALUES_SINGLE = "SOME_VALUES_SINGLE"


@dataclass(frozen=True, slots=True)
class RestrictionAxiom:
    """``subject SubClassOf property <restriction> targets``.

    Raises:
        ValueError: If the number of targets does not fit *kind*.
    """

    subject_iri: str
    kind: AxiomKind
    property_name: str
    target_iris: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.kind is AxiomKind.SOME_VALUES_INTERSECTION:
            if len(self.target_iris) < 2:
                raise ValueError("an intersection restriction needs at least two targets")
        elif len(self.target_iris) != 1:
            raise ValueError(f"{self.kind.value} takes exactly one target")


@dataclass(frozen=True, slots=True)
class OwlDocument:
    """Ordered class declarations plus restriction axioms.

    The namespace declarations are fixed to ``rdf``, ``rdfs`` and ``owl``.
    """

    classes: tuple[OwlClass, ...] = ()
    axioms: tuple[RestrictionAxiom, ...] = field(default=())

    @property
    def iris(self) -> set[str]:
        return {cls.iri for cls in self.classes}

    def edges(self) -> set[tuple[str, str]]:
        return {(cls.iri, parent) for cls in self.classes for parent in cls.parents}

    def dangling_parents(self) -> set[str]:
        """Parent IRIs that are not themselves declared."""
        return {parent for _, parent in self.edges()} - self.iris


def is_absolute_iri(value: str) -> bool:
    parsed = urlparse(value)
    return bool(parsed.scheme) and (bool(parsed.netloc) or parsed.scheme in {"urn", "tag"}) and " " not in value


# ----------------------------------------------------------------------
# Graph -> document
# ----------------------------------------------------------------------


def _banner(title: str, label: str, replaced: Iterable[str]) -> str:
    names = sorted(replaced)
    suffix = f" (for {', '.join(names)})" if names else ""
    return f"{title} {label}{suffix}"


def document_from_graph(graph: TaxonomyGraph, config: EmitConfig | None = None) -> OwlDocument:
    """Build the :class:`OwlDocument` for *graph*, classes in rank-then-key order."""
    config = config or EmitConfig()
    classes = tuple(
        OwlClass(
            iri=config.class_iri(node.key),
            labels=((node.label, config.lang_tag),),
            parents=(config.class_iri(node.parent_key),) if node.parent_key is not None else (),
            comment=_banner(node.rank.title, node.label, graph.replaced_names.get(node.key, ())),
        )
        for node in graph.ordered()
    )
    return OwlDocument(classes=classes)


def emit(graph: TaxonomyGraph, config: EmitConfig | None = None) -> str:
    """Serialize *graph* as an RDF/XML OWL document.

    An empty graph yields the namespace header and no classes (logged as
    a warning).
    """
    config = config or EmitConfig()
    if not graph.nodes:
        logger.warning("taxonomy graph is empty; emitting a document without classes")
    return serialize(document_from_graph(graph, config), comments=config.emit_comments)


# ----------------------------------------------------------------------
# Serialization
# ----------------------------------------------------------------------


def _attr(value: str) -> str:
    return '"' + escape(value, {'"': "&quot;"}) + '"'


def _comment(text: str) -> str:
    safe = text.replace("--", "- -")
    return f"<!-- {safe} -->"


def _class_lines(cls: OwlClass, comments: bool) -> list[str]:
    lines: list[str] = []
    if comments and cls.comment:
        lines.append(_INDENT + _comment(cls.comment))
    body = [
        f"<rdfs:label xml:lang={_attr(lang)}>{escape(text)}</rdfs:label>" for text, lang in cls.labels
    ] + [f"<rdfs:subClassOf rdf:resource={_attr(parent)}/>" for parent in cls.parents]
    if not body:
        lines.append(f"{_INDENT}<owl:Class rdf:about={_attr(cls.iri)}/>")
        return lines
    lines.append(f"{_INDENT}<owl:Class rdf:about={_attr(cls.iri)}>")
    lines.extend(_INDENT * 2 + line for line in body)
    lines.append(f"{_INDENT}</owl:Class>")
    return lines


def serialize(document: OwlDocument, comments: bool = False) -> str:
    """Render *document* as RDF/XML text (UTF-8, ``\\n`` line endings)."""
    lines = [*_HEADER, ""]
    for cls in document.classes:
        lines.extend(_class_lines(cls, comments))
        lines.append("")
    lines.append(_FOOTER)
    return "\n".join(lines) + "\n"


def emit_axioms(axioms: Sequence[RestrictionAxiom], config: EmitConfig | None = None) -> str:
    """Render restriction axioms as an OWL/XML ``SubClassOf`` fragment.

    Raises:
        UnresolvedTargetError: If a subject or target is not an absolute IRI.
    """
    config = config or EmitConfig()
    blocks: list[str] = []
    for axiom in axioms:
        for iri in (axiom.subject_iri, *axiom.target_iris):
            if not is_absolute_iri(iri):
                raise UnresolvedTargetError(f"{iri!r} is not a resolved class IRI")
        blocks.append("\n".join(_axiom_lines(axiom, config)))
    return "".join(block + "\n" for block in blocks)


def _axiom_lines(axiom: RestrictionAxiom, config: EmitConfig) -> list[str]:
    prop = f"<ObjectProperty IRI={_attr(config.property_iri(axiom.property_name))}/>"
    targets = [f"<Class IRI={_attr(iri)}/>" for iri in axiom.target_iris]

    if axiom.kind is AxiomKind.SOME_VALUES_INTERSECTION:
        restriction = [
            "<ObjectSomeValuesFrom>",
            _INDENT + prop,
            _INDENT + "<ObjectIntersectionOf>",
            *(_INDENT * 2 + t for t in targets),
            _INDENT + "</ObjectIntersectionOf>",
            "</ObjectSomeValuesFrom>",
        ]
    elif axiom.kind is AxiomKind.EXACT_CARDINALITY_1:
        restriction = [
            '<ObjectExactCardinality cardinality="1">',
            _INDENT + prop,
            _INDENT + targets[0],
            "</ObjectExactCardinality>",
        ]
    else:
        restriction = [
            "<ObjectSomeValuesFrom>",
            _INDENT + prop,
            _INDENT + targets[0],
            "</ObjectSomeValuesFrom>",
        ]

    return [
        f"{_INDENT}<SubClassOf>",
        f"{_INDENT * 2}<Class IRI={_attr(axiom.subject_iri)}/>",
        *(_INDENT * 2 + line for line in restriction),
        f"{_INDENT}</SubClassOf>",
    ]
