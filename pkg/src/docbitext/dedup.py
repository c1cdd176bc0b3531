"""Content-based deduplication.

Two layers, mirroring the corpus build: exact-content dedup per URL within a
single language, and global consolidation of the English side across all
language pairs.  Dropped documents are recorded in a remap table so alignment
references can be rewritten onto the surviving canonical versions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .model import DocPairAlignment, StructuredDocument


class DanglingReferenceError(KeyError):
    """An alignment references a document id that was neither kept nor remapped."""


class NonEnglishDocumentError(ValueError):
    """English consolidation received a document in another language."""


@dataclass
class RemapTable:
    """old doc_id -> canonical doc_id for every dropped document.

    Canonical ids map to themselves via :meth:`resolve`, so composing the
    table with itself is a no-op.
    """

    mapping: dict[str, str] = field(default_factory=dict)

    def resolve(self, doc_id: str) -> str:
        return self.mapping.get(doc_id, doc_id)

    def merge(self, other: "RemapTable") -> "RemapTable":
        merged = dict(self.mapping)
        for old, canonical in other.mapping.items():
            merged[old] = self.resolve(canonical)
        return RemapTable(merged)

    def to_tsv(self) -> str:
        return "".join(
            f"{old}\t{canonical}\n" for old, canonical in sorted(self.mapping.items())
        )

    @classmethod
    def from_tsv(cls, text: str) -> "RemapTable":
        mapping = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            old, canonical = line.split("\t")
            mapping[old] = canonical
        return cls(mapping)


def dedup_by_url(docs: Iterable[StructuredDocument]) -> tuple[list[StructuredDocument], RemapTable]:
    """Collapse byte-identical content under the same URL; first seen wins.

    Distinct versions of one URL survive, as does identical content hosted at
    different URLs.
    """
    kept: list[StructuredDocument] = []
    canonical_by_key: dict[tuple[str, str], str] = {}
    table = RemapTable()
    for doc in docs:
        key = (doc.url, doc.content_fingerprint())
        existing = canonical_by_key.get(key)
        if existing is None:
            canonical_by_key[key] = doc.doc_id
            kept.append(doc)
        elif doc.doc_id != existing:
            table.mapping[doc.doc_id] = existing
    return kept, table


def consolidate_english(
    collections: Sequence[tuple[str, Sequence[StructuredDocument]]],
) -> tuple[list[StructuredDocument], RemapTable]:
    """Unify the English collections of all pairs into one, deduplicated by
    (url, content) so a page aligned to several languages appears once."""
    kept: list[StructuredDocument] = []
    canonical_by_key: dict[tuple[str, str], str] = {}
    table = RemapTable()
    for pair_label, docs in collections:
        for doc in docs:
            if doc.lang != "en":
                raise NonEnglishDocumentError(
                    f"document {doc.doc_id!r} in collection {pair_label!r} has lang "
                    f"{doc.lang!r}, expected 'en'"
                )
            key = (doc.url, doc.content_fingerprint())
            existing = canonical_by_key.get(key)
            if existing is None:
                canonical_by_key[key] = doc.doc_id
                kept.append(doc)
            elif doc.doc_id != existing:
                table.mapping[doc.doc_id] = existing
    return kept, table


def remap_alignments(
    pairs: Sequence[DocPairAlignment],
    table: RemapTable,
    documents: Mapping[str, StructuredDocument],
) -> tuple[list[DocPairAlignment], int]:
    """Point every pair at the canonical document versions.

    ``documents`` must cover every canonical id.  Pairs whose two sides
    collapse onto the same document are dropped; the second return value
    counts them.
    """
    remapped: list[DocPairAlignment] = []
    collapsed = 0
    for pair in pairs:
        new_sides = []
        for doc in (pair.src_doc, pair.tgt_doc):
            canonical_id = table.resolve(doc.doc_id)
            canonical = documents.get(canonical_id)
            if canonical is None:
                raise DanglingReferenceError(
                    f"document reference {doc.doc_id!r} resolves to {canonical_id!r}, "
                    "which is not in the kept collection"
                )
            new_sides.append(canonical)
        src, tgt = new_sides
        if src.doc_id == tgt.doc_id:
            collapsed += 1
            continue
        if src is pair.src_doc and tgt is pair.tgt_doc:
            remapped.append(pair)
        else:
            remapped.append(
                DocPairAlignment(
                    src_doc=src,
                    tgt_doc=tgt,
                    links=pair.links,
                    density=len(pair.links) / max(len(src), len(tgt)),
                    avg_scores=pair.avg_scores,
                )
            )
    return remapped, collapsed
