"""Core data model for structured documents, alignment links, and document pairs.

Also houses the two interchange codecs: the per-document XML format
(``<doc><P id="4"><s id="4.3">...</s></P></doc>``) and the cesAlign link
format.  Both codecs are pure functions and serialization is canonical, so
serialize -> parse -> serialize is byte-identical.
"""

from __future__ import annotations

import hashlib
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence
from xml.sax.saxutils import escape, quoteattr


class DocumentXmlError(ValueError):
    """Malformed document XML (syntax level), with line/column when known."""


class StructureError(ValueError):
    """Well-formed XML whose ids or nesting violate the document invariants."""


class CesAlignError(ValueError):
    """Malformed or invalid cesAlign input."""


_LANG_RE = re.compile(r"^[a-z]{2,3}$")

SCORE_FIELDS = ("bleualign", "bicleaner", "bifixer")


@dataclass(frozen=True, order=True)
class SentenceId:
    """Hierarchical sentence identifier, rendered as "paragraph.sentence"."""

    paragraph: int
    sentence: int

    def __post_init__(self) -> None:
        if self.paragraph < 1 or self.sentence < 1:
            raise ValueError(f"sentence id components must be >= 1, got {self}")

    def __str__(self) -> str:
        return f"{self.paragraph}.{self.sentence}"

    @classmethod
    def parse(cls, text: str) -> "SentenceId":
        m = re.fullmatch(r"([1-9][0-9]*)\.([1-9][0-9]*)", text)
        if m is None:
            raise ValueError(f"invalid sentence id {text!r}")
        return cls(int(m.group(1)), int(m.group(2)))


def check_language_tag(code: str) -> str:
    if not _LANG_RE.fullmatch(code):
        raise ValueError(f"invalid language tag {code!r}")
    return code


@dataclass(frozen=True)
class AlignmentScoreSet:
    """Per-link (or per-pair averaged) quality scores; each field optional."""

    bleualign: Optional[float] = None
    bicleaner: Optional[float] = None
    bifixer: Optional[float] = None

    def __post_init__(self) -> None:
        for name in SCORE_FIELDS:
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} score {value} outside [0, 1]")

    def is_empty(self) -> bool:
        return all(getattr(self, name) is None for name in SCORE_FIELDS)


@dataclass(frozen=True)
class AlignmentLink:
    """One aligned sentence group pair; counts as one alignment regardless of arity."""

    src_ids: tuple[SentenceId, ...]
    tgt_ids: tuple[SentenceId, ...]
    scores: AlignmentScoreSet = field(default_factory=AlignmentScoreSet)

    def __post_init__(self) -> None:
        if not self.src_ids or not self.tgt_ids:
            raise ValueError("alignment link must have ids on both sides")
        for name, ids in (("src", self.src_ids), ("tgt", self.tgt_ids)):
            if list(ids) != sorted(ids):
                raise ValueError(f"{name} ids not sorted ascending: {ids}")


@dataclass(frozen=True)
class StructuredDocument:
    """One URL snapshot's full text as ordered paragraphs of id'd sentences."""

    doc_id: str
    url: str
    lang: str
    collection: str
    paragraphs: tuple[tuple[int, tuple[tuple[SentenceId, str], ...]], ...]

    def __post_init__(self) -> None:
        check_language_tag(self.lang)
        if not self.paragraphs:
            raise StructureError(f"document {self.doc_id!r} has no paragraphs")
        for p_index, (pid, sentences) in enumerate(self.paragraphs, start=1):
            if pid != p_index:
                raise StructureError(
                    f"paragraph id {pid} out of order (expected {p_index}) in {self.doc_id!r}"
                )
            if not sentences:
                raise StructureError(f"paragraph {pid} of {self.doc_id!r} is empty")
            for s_index, (sid, text) in enumerate(sentences, start=1):
                if sid.paragraph != pid or sid.sentence != s_index:
                    raise StructureError(
                        f"sentence id {sid} out of order in paragraph {pid} "
                        f"(expected {pid}.{s_index}) in {self.doc_id!r}"
                    )
                if "\n" in text:
                    raise StructureError(f"sentence {sid} of {self.doc_id!r} contains a newline")

    def __len__(self) -> int:
        return sum(len(sentences) for _, sentences in self.paragraphs)

    def sentences(self) -> Iterable[tuple[SentenceId, str]]:
        for _, sents in self.paragraphs:
            yield from sents

    def sentence_ids(self) -> set[SentenceId]:
        return {sid for sid, _ in self.sentences()}

    def sentence_text(self, sid: SentenceId) -> str:
        if not self.has_sentence(sid):
            raise KeyError(f"sentence {sid} not in document {self.doc_id!r}")
        return self.paragraphs[sid.paragraph - 1][1][sid.sentence - 1][1]

    def has_sentence(self, sid: SentenceId) -> bool:
        return (
            1 <= sid.paragraph <= len(self.paragraphs)
            and 1 <= sid.sentence <= len(self.paragraphs[sid.paragraph - 1][1])
        )

    def content_text(self) -> str:
        """Full text, sentences joined by single spaces, paragraphs by newlines."""
        return "\n".join(
            " ".join(text for _, text in sents) for _, sents in self.paragraphs
        )

    def content_fingerprint(self) -> str:
        """Identity hash of the text content including paragraph boundaries.

        Sentences never contain newlines, so the sentence/"\\n" and
        paragraph/"\\n\\n" delimiters are unambiguous.
        """
        joined = "\n\n".join(
            "\n".join(text for _, text in sents) for _, sents in self.paragraphs
        )
        return hashlib.sha256(joined.encode("utf-8")).hexdigest()


def make_doc_id(url: str, lang: str, fingerprint: str) -> str:
    """Deterministic document id from (url, content) so URL snapshots coexist."""
    digest = hashlib.sha256(f"{url}\n{fingerprint}".encode("utf-8")).hexdigest()
    return f"{lang}-{digest[:16]}"


@dataclass(frozen=True)
class DocPairAlignment:
    """Two documents plus their verified link set and cached aggregates."""

    src_doc: StructuredDocument
    tgt_doc: StructuredDocument
    links: tuple[AlignmentLink, ...]
    density: float
    avg_scores: AlignmentScoreSet = field(default_factory=AlignmentScoreSet)

    def __post_init__(self) -> None:
        seen_src: set[SentenceId] = set()
        seen_tgt: set[SentenceId] = set()
        for link in self.links:
            for sid in link.src_ids:
                if not self.src_doc.has_sentence(sid):
                    raise StructureError(
                        f"link source id {sid} not in document {self.src_doc.doc_id!r}"
                    )
                if sid in seen_src:
                    raise StructureError(f"source id {sid} appears in more than one link")
                seen_src.add(sid)
            for sid in link.tgt_ids:
                if not self.tgt_doc.has_sentence(sid):
                    raise StructureError(
                        f"link target id {sid} not in document {self.tgt_doc.doc_id!r}"
                    )
                if sid in seen_tgt:
                    raise StructureError(f"target id {sid} appears in more than one link")
                seen_tgt.add(sid)
        expected = len(self.links) / max(len(self.src_doc), len(self.tgt_doc))
        if abs(self.density - expected) > 1e-12:
            raise ValueError(
                f"cached density {self.density} disagrees with recomputation {expected}"
            )

    @property
    def pair_id(self) -> str:
        return f"{self.src_doc.doc_id}::{self.tgt_doc.doc_id}"


# ---------------------------------------------------------------------------
# Document XML codec
# ---------------------------------------------------------------------------

def _format_score(value: float) -> str:
    return repr(value)


def serialize_document_xml(doc: StructuredDocument) -> str:
    """Canonical single-document XML serialization."""
    out = [
        f"<doc id={quoteattr(doc.doc_id)} url={quoteattr(doc.url)} "
        f"lang={quoteattr(doc.lang)} collection={quoteattr(doc.collection)}>"
    ]
    for pid, sentences in doc.paragraphs:
        out.append(f'  <P id="{pid}">')
        for sid, text in sentences:
            out.append(f'    <s id="{sid}">{escape(text)}</s>')
        out.append("  </P>")
    out.append("</doc>")
    return "\n".join(out) + "\n"


def _doc_from_element(elem: ET.Element) -> StructuredDocument:
    if elem.tag != "doc":
        raise StructureError(f"expected <doc> element, found <{elem.tag}>")
    attrs = {}
    for name in ("id", "url", "lang", "collection"):
        if name not in elem.attrib:
            raise StructureError(f"<doc> missing required attribute {name!r}")
        attrs[name] = elem.attrib[name]
    paragraphs = []
    for p_elem in elem:
        if p_elem.tag != "P":
            raise StructureError(f"unexpected element <{p_elem.tag}> inside <doc>")
        try:
            pid = int(p_elem.attrib["id"])
        except (KeyError, ValueError) as exc:
            raise StructureError(f"bad paragraph id: {p_elem.attrib.get('id')!r}") from exc
        sentences = []
        for s_elem in p_elem:
            if s_elem.tag != "s":
                raise StructureError(f"unexpected element <{s_elem.tag}> inside <P>")
            try:
                sid = SentenceId.parse(s_elem.attrib.get("id", ""))
            except ValueError as exc:
                raise StructureError(str(exc)) from exc
            if sid.paragraph != pid:
                raise StructureError(
                    f"sentence id {sid} nested under paragraph {pid}"
                )
            sentences.append((sid, s_elem.text or ""))
        paragraphs.append((pid, tuple(sentences)))
    return StructuredDocument(
        doc_id=attrs["id"],
        url=attrs["url"],
        lang=attrs["lang"],
        collection=attrs["collection"],
        paragraphs=tuple(paragraphs),
    )


def _parse_xml(data: str | bytes) -> ET.Element:
    try:
        return ET.fromstring(data)
    except ET.ParseError as exc:
        line, column = exc.position
        raise DocumentXmlError(f"malformed XML at line {line}, column {column}: {exc.msg}") from exc


def parse_document_xml(data: str | bytes) -> StructuredDocument:
    """Parse a single ``<doc>`` element; structural errors name the offending id."""
    return _doc_from_element(_parse_xml(data))


def serialize_corpus_xml(docs: Sequence[StructuredDocument]) -> str:
    """Many documents in one stream, under a ``<corpus>`` root."""
    out = ["<corpus>\n"]
    for doc in docs:
        body = serialize_document_xml(doc)
        out.append("".join("  " + line + "\n" for line in body.rstrip("\n").split("\n")))
    out.append("</corpus>\n")
    return "".join(out)


def parse_corpus_xml(data: str | bytes) -> list[StructuredDocument]:
    root = _parse_xml(data)
    if root.tag == "doc":
        return [_doc_from_element(root)]
    if root.tag != "corpus":
        raise StructureError(f"expected <corpus> or <doc> root, found <{root.tag}>")
    return [_doc_from_element(child) for child in root]


# ---------------------------------------------------------------------------
# cesAlign codec
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinkGroup:
    """One ``<linkGrp>``: a pair of document ids plus its ordered links.

    ``pivot`` carries the English pivot document id on derived non-English
    groups and is absent otherwise.
    """

    from_doc: str
    to_doc: str
    links: tuple[AlignmentLink, ...]
    pivot: Optional[str] = None


def _ids_from_xtargets(side: str) -> tuple[SentenceId, ...]:
    return tuple(SentenceId.parse(token) for token in side.split(" "))


def parse_cesalign(data: str | bytes) -> list[LinkGroup]:
    root = _parse_xml(data)
    if root.tag == "linkGrp":
        groups = [root]
    elif root.tag == "cesAlign":
        groups = list(root)
    else:
        raise CesAlignError(f"expected <cesAlign> or <linkGrp> root, found <{root.tag}>")

    result = []
    for grp in groups:
        if grp.tag != "linkGrp":
            raise CesAlignError(f"unexpected element <{grp.tag}> inside <cesAlign>")
        try:
            from_doc = grp.attrib["fromDoc"]
            to_doc = grp.attrib["toDoc"]
        except KeyError as exc:
            raise CesAlignError(f"<linkGrp> missing attribute {exc.args[0]!r}") from exc
        links = []
        for link_elem in grp:
            if link_elem.tag != "link":
                raise CesAlignError(f"unexpected element <{link_elem.tag}> inside <linkGrp>")
            xtargets = link_elem.attrib.get("xtargets", "")
            parts = xtargets.split(";")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise CesAlignError(
                    f"xtargets {xtargets!r} must have non-empty source and target sides"
                )
            try:
                src_ids = _ids_from_xtargets(parts[0])
                tgt_ids = _ids_from_xtargets(parts[1])
            except ValueError as exc:
                raise CesAlignError(f"bad xtargets {xtargets!r}: {exc}") from exc
            score_values = {}
            for name in SCORE_FIELDS:
                if name in link_elem.attrib:
                    try:
                        score_values[name] = float(link_elem.attrib[name])
                    except ValueError as exc:
                        raise CesAlignError(
                            f"bad {name} score {link_elem.attrib[name]!r}"
                        ) from exc
            try:
                links.append(
                    AlignmentLink(src_ids, tgt_ids, AlignmentScoreSet(**score_values))
                )
            except ValueError as exc:
                raise CesAlignError(str(exc)) from exc
        result.append(
            LinkGroup(from_doc, to_doc, tuple(links), pivot=grp.attrib.get("pivot"))
        )
    return result


def serialize_cesalign(groups: Sequence[LinkGroup]) -> str:
    out = ['<cesAlign version="1.0">\n']
    for grp in groups:
        pivot = f" pivot={quoteattr(grp.pivot)}" if grp.pivot is not None else ""
        out.append(
            f"  <linkGrp fromDoc={quoteattr(grp.from_doc)} "
            f'toDoc={quoteattr(grp.to_doc)} targType="s"{pivot}>\n'
        )
        for link in grp.links:
            xtargets = (
                " ".join(str(s) for s in link.src_ids)
                + ";"
                + " ".join(str(s) for s in link.tgt_ids)
            )
            scores = "".join(
                f' {name}="{_format_score(getattr(link.scores, name))}"'
                for name in SCORE_FIELDS
                if getattr(link.scores, name) is not None
            )
            out.append(f'    <link xtargets="{escape(xtargets)}"{scores}/>\n')
        out.append("  </linkGrp>\n")
    out.append("</cesAlign>\n")
    return "".join(out)
