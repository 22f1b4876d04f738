"""Annotated collection: marker-format parsing, loading, and slicing.

The collection is stored as plain-text files in which each paragraph is
preceded by a marker line (``D1//``, ``D0//``, ``0//``, ``T0//`` or
``E0//``).  A JSON-lines manifest enumerates every document file together
with its batch, custodian, subject file, topic and reviewer.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import IntegrityError, MalformedDocumentError, MissingAnnotationError

# Annotation codes.  D1 marks material within the scope of the privilege;
# the three zero codes distinguish decided, trivial and easy non-exempt text.
D1 = "D1"
D0 = "D0"
T0 = "T0"
E0 = "E0"
LABELS = (D1, D0, T0, E0)

# ``0//`` is shorthand for a decided zero and normalizes to D0.
MARKER_MAP = {"D1//": D1, "D0//": D0, "0//": D0, "T0//": T0, "E0//": E0}

BATCHES = ("K1", "K2", "K3", "R4", "K5", "E5")
CUSTODIANS = ("Kagan", "Rice")

TOPICS = (
    "Drugs",
    "Health",
    "Tax Proposals",
    "Welfare",
    "Child Support",
    "Service",
    "Miscellaneous Emails",
    "Disability",
    "Education",
    "Budget",
    "Kids",
    "Environment",
    "Social Security",
    "Fathers",
    "Family",
    "Superfund",
)

_MARKER_CANDIDATE = re.compile(r"[A-Za-z0-9]{1,3}//")


def custodian_for_batch(batch: str) -> str:
    return "Rice" if batch == "R4" else "Kagan"


@dataclass(frozen=True)
class DocumentMeta:
    """Manifest row describing one annotated file on disk."""

    doc_id: str
    batch: str
    custodian: str
    file_name: str
    topic: str
    reviewer: str


@dataclass
class Paragraph:
    id: str
    ordinal: int
    text: str
    labels: dict[str, str] = field(default_factory=dict)

    def label_for(self, reviewer: str) -> str | None:
        return self.labels.get(reviewer)


@dataclass
class Document:
    id: str
    batch: str
    custodian: str
    file_name: str
    topic: str
    paragraphs: list[Paragraph]

    def reviewers(self) -> set[str]:
        out: set[str] = set()
        for p in self.paragraphs:
            out.update(p.labels)
        return out


class Corpus:
    """Immutable view over the loaded collection."""

    def __init__(self, documents: list[Document]):
        self.documents = documents
        self._by_id = {d.id: d for d in documents}
        self._paragraphs = {p.id: p for d in documents for p in d.paragraphs}
        self.reviewers: set[str] = set()
        for doc in documents:
            self.reviewers.update(doc.reviewers())
        self.paragraph_counts: dict[str, int] = {}
        for doc in documents:
            self.paragraph_counts[doc.batch] = self.paragraph_counts.get(doc.batch, 0) + len(
                doc.paragraphs
            )

    def document(self, doc_id: str) -> Document:
        return self._by_id[doc_id]

    def paragraph(self, paragraph_id: str) -> Paragraph:
        return self._paragraphs[paragraph_id]

    def __len__(self) -> int:
        return len(self.documents)

    def iter_paragraphs(self, batches: set[str] | None = None):
        for doc in self.documents:
            if batches is None or doc.batch in batches:
                for p in doc.paragraphs:
                    yield doc, p


@dataclass(frozen=True)
class LabelScope:
    """Which zero codes form the negative class for an experiment."""

    negatives: frozenset[str]

    _ALLOWED = (frozenset({D0}), frozenset({D0, T0}), frozenset({D0, T0, E0}))

    def __post_init__(self):
        if self.negatives not in self._ALLOWED:
            raise ValueError(f"unsupported negative-label set: {sorted(self.negatives)}")

    @property
    def positive(self) -> str:
        return D1

    @classmethod
    def from_name(cls, name: str) -> "LabelScope":
        try:
            return _SCOPES[name.lower()]
        except KeyError:
            raise ValueError(f"unknown scope name: {name!r}") from None

    @property
    def name(self) -> str:
        for key, scope in _SCOPES.items():
            if scope.negatives == self.negatives:
                return key
        raise AssertionError("unreachable")


_SCOPES = {
    "d0": LabelScope(frozenset({D0})),
    "d0t0": LabelScope(frozenset({D0, T0})),
    "d0t0e0": LabelScope(frozenset({D0, T0, E0})),
}

SCOPE_D0 = _SCOPES["d0"]
SCOPE_D0_T0 = _SCOPES["d0t0"]
SCOPE_D0_T0_E0 = _SCOPES["d0t0e0"]


def binarize(label: str, scope: LabelScope) -> int | None:
    """Map an annotation code to 1/0, or None when outside the scope."""
    if label == D1:
        return 1
    if label in scope.negatives:
        return 0
    return None


@dataclass(frozen=True)
class Example:
    """One (paragraph, binary label) pair with its document linkage."""

    paragraph_id: str
    document_id: str
    ordinal: int
    text: str
    label: int


@dataclass
class DataSet:
    examples: list[Example]
    reviewer: str
    scope: LabelScope

    def __len__(self) -> int:
        return len(self.examples)

    @property
    def texts(self) -> list[str]:
        return [e.text for e in self.examples]

    @property
    def labels(self) -> list[int]:
        return [e.label for e in self.examples]

    @property
    def positives(self) -> int:
        return sum(e.label for e in self.examples)

    def by_document(self) -> dict[str, list[Example]]:
        """Examples grouped by document, each group ordered by ordinal."""
        groups: dict[str, list[Example]] = {}
        for ex in self.examples:
            groups.setdefault(ex.document_id, []).append(ex)
        for group in groups.values():
            group.sort(key=lambda e: e.ordinal)
        return groups

    def subset(self, indices) -> "DataSet":
        return DataSet([self.examples[i] for i in indices], self.reviewer, self.scope)


def parse_annotated_document(raw_text: str, meta: DocumentMeta) -> Document:
    """Parse one marker-format file into a Document.

    Paragraph text is every line between a marker and the next marker (or
    end of file), with leading/trailing blank lines stripped and interior
    line breaks preserved.  Labels are attributed to ``meta.reviewer``.
    """
    pending: list[tuple[str, int, list[str]]] = []  # (label, marker line no, lines)
    for lineno, line in enumerate(raw_text.split("\n"), start=1):
        stripped = line.strip()
        if stripped in MARKER_MAP:
            pending.append((MARKER_MAP[stripped], lineno, []))
            continue
        if _MARKER_CANDIDATE.fullmatch(stripped):
            raise MalformedDocumentError(
                f"{meta.doc_id}: unknown marker token {stripped!r} at line {lineno}"
            )
        if not pending:
            if stripped:
                raise MalformedDocumentError(
                    f"{meta.doc_id}: text before first marker at line {lineno}"
                )
            continue  # blank lines before the first marker are tolerated
        pending[-1][2].append(line)

    if not pending:
        raise MalformedDocumentError(f"{meta.doc_id}: no label marker found")

    paragraphs = []
    for ordinal, (label, lineno, lines) in enumerate(pending):
        while lines and not lines[0].strip():
            lines.pop(0)
        while lines and not lines[-1].strip():
            lines.pop()
        text = "\n".join(lines)
        if not text.strip():
            raise MalformedDocumentError(
                f"{meta.doc_id}: empty paragraph under marker at line {lineno}"
            )
        paragraphs.append(
            Paragraph(
                id=f"{meta.doc_id}/{ordinal:03d}",
                ordinal=ordinal,
                text=text,
                labels={meta.reviewer: label},
            )
        )
    return Document(
        id=meta.doc_id,
        batch=meta.batch,
        custodian=meta.custodian,
        file_name=meta.file_name,
        topic=meta.topic,
        paragraphs=paragraphs,
    )


def serialize_document(document: Document, reviewer: str) -> str:
    """Render a document back to marker format for one reviewer's labels."""
    lines: list[str] = []
    for paragraph in document.paragraphs:
        label = paragraph.labels.get(reviewer)
        if label is None:
            raise MissingAnnotationError(
                f"{document.id}: no {reviewer!r} label on paragraph {paragraph.ordinal}"
            )
        lines.append(f"{label}//")
        lines.append(paragraph.text)
    return "\n".join(lines) + "\n"


def load_collection(manifest_path: str | Path) -> Corpus:
    """Load the collection described by a JSON-lines manifest.

    Rows sharing a ``doc_id`` are per-reviewer copies of the same document
    and are merged; their paragraph texts must agree exactly.  An optional
    ``batch_counts`` row declares expected per-batch paragraph totals that
    are verified after loading.
    """
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    expected_counts: dict[str, int] | None = None

    order: list[str] = []
    rows_by_doc: dict[str, list[DocumentMeta]] = {}
    paths: dict[tuple[str, str], Path] = {}
    with open(manifest_path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            row = json.loads(raw)
            if "batch_counts" in row:
                expected_counts = {str(k): int(v) for k, v in row["batch_counts"].items()}
                continue
            try:
                meta = DocumentMeta(
                    doc_id=row["doc_id"],
                    batch=row["batch"],
                    custodian=row["custodian"],
                    file_name=row["file_name"],
                    topic=row["topic"],
                    reviewer=row["reviewer"],
                )
            except KeyError as exc:
                raise IntegrityError(f"{manifest_path}:{lineno}: missing field {exc}") from None
            _validate_meta(meta, manifest_path, lineno)
            key = (meta.doc_id, meta.reviewer)
            if key in paths:
                raise IntegrityError(
                    f"duplicate manifest entry for document {meta.doc_id!r} reviewer {meta.reviewer!r}"
                )
            paths[key] = base / row["path"]
            if meta.doc_id not in rows_by_doc:
                order.append(meta.doc_id)
            rows_by_doc.setdefault(meta.doc_id, []).append(meta)

    documents: list[Document] = []
    for doc_id in order:
        merged: Document | None = None
        for meta in rows_by_doc[doc_id]:
            raw_text = paths[(meta.doc_id, meta.reviewer)].read_text(encoding="utf-8")
            parsed = parse_annotated_document(raw_text, meta)
            if merged is None:
                merged = parsed
                continue
            if (meta.batch, meta.custodian, meta.file_name, meta.topic) != (
                merged.batch,
                merged.custodian,
                merged.file_name,
                merged.topic,
            ):
                raise IntegrityError(f"{doc_id}: reviewer copies disagree on metadata")
            if len(parsed.paragraphs) != len(merged.paragraphs):
                raise IntegrityError(f"{doc_id}: reviewer copies have different paragraph counts")
            for ours, theirs in zip(merged.paragraphs, parsed.paragraphs):
                if ours.text != theirs.text:
                    raise IntegrityError(
                        f"{doc_id}: paragraph {ours.ordinal} text differs between reviewer copies"
                    )
                ours.labels.update(theirs.labels)
        assert merged is not None
        documents.append(merged)

    corpus = Corpus(documents)
    for doc, paragraph in corpus.iter_paragraphs():
        for label in paragraph.labels.values():
            if label == E0 and doc.batch != "E5":
                raise IntegrityError(f"{paragraph.id}: E0 outside batch E5")
    if expected_counts is not None:
        for batch, expected in expected_counts.items():
            actual = corpus.paragraph_counts.get(batch, 0)
            if actual != expected:
                raise IntegrityError(
                    f"batch {batch}: expected {expected} paragraphs, loaded {actual}"
                )
    return corpus


def _validate_meta(meta: DocumentMeta, manifest_path: Path, lineno: int) -> None:
    where = f"{manifest_path}:{lineno}"
    if meta.batch not in BATCHES:
        raise IntegrityError(f"{where}: unknown batch {meta.batch!r}")
    if meta.custodian != custodian_for_batch(meta.batch):
        raise IntegrityError(
            f"{where}: batch {meta.batch} belongs to {custodian_for_batch(meta.batch)}, "
            f"manifest says {meta.custodian!r}"
        )
    if meta.topic not in TOPICS:
        raise IntegrityError(f"{where}: unknown topic {meta.topic!r}")


def select(corpus: Corpus, batches: set[str], reviewer: str, scope: LabelScope) -> DataSet:
    """Slice the corpus into (paragraph, binary label) pairs.

    Paragraphs whose code falls outside the scope are excluded.  Document
    linkage (document id and paragraph ordinal) is preserved so sequence
    models can reconstruct reading order.
    """
    unknown = set(batches) - set(BATCHES)
    if unknown:
        raise ValueError(f"unknown batches: {sorted(unknown)}")
    seen_batches: set[str] = set()
    examples: list[Example] = []
    for doc, paragraph in corpus.iter_paragraphs(set(batches)):
        label = paragraph.labels.get(reviewer)
        if label is None:
            raise MissingAnnotationError(
                f"reviewer {reviewer!r} has no annotation on {paragraph.id} (batch {doc.batch})"
            )
        seen_batches.add(doc.batch)
        binary = binarize(label, scope)
        if binary is None:
            continue
        examples.append(
            Example(
                paragraph_id=paragraph.id,
                document_id=doc.id,
                ordinal=paragraph.ordinal,
                text=paragraph.text,
                label=binary,
            )
        )
    missing = set(batches) - seen_batches
    if missing:
        raise MissingAnnotationError(
            f"no documents found for batches {sorted(missing)} (reviewer {reviewer!r})"
        )
    return DataSet(examples, reviewer, scope)


def select_topic(corpus: Corpus, topic: str, reviewer: str, scope: LabelScope,
                 exclude: bool = False) -> DataSet:
    """Select paragraphs of one topic (or, with exclude=True, all others)."""
    if topic not in TOPICS:
        raise ValueError(f"unknown topic: {topic!r}")
    examples: list[Example] = []
    for doc, paragraph in corpus.iter_paragraphs():
        if (doc.topic == topic) == exclude:
            continue
        label = paragraph.labels.get(reviewer)
        if label is None:
            continue
        binary = binarize(label, scope)
        if binary is None:
            continue
        examples.append(
            Example(
                paragraph_id=paragraph.id,
                document_id=doc.id,
                ordinal=paragraph.ordinal,
                text=paragraph.text,
                label=binary,
            )
        )
    return DataSet(examples, reviewer, scope)


def export_dataset(dataset: DataSet, path: str | Path) -> None:
    """Write a dataset as tab-delimited (id, label, text) rows for audit."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        for ex in dataset.examples:
            writer.writerow([ex.paragraph_id, ex.label, ex.text])
