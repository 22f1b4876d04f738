"""B/I/O construction from paragraph labels and mapping back.

Adjacent privileged paragraphs merge into a single B..I span; a paragraph
is predicted privileged when the share of its words tagged B or I meets
the overlap threshold (inclusive, so 100% is satisfiable).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptySequenceError, InvalidSpanError

OVERLAP_PERCENTS = tuple(range(10, 101, 10))


@dataclass
class BIOSequence:
    tokens: list[str]
    paragraph_spans: list[tuple[int, int]]   # half-open token offsets
    tags: list[str]


def paragraphs_to_bio(paragraph_tokens: list[list[str]], labels: list[int]) -> BIOSequence:
    """Tag every word of a document from its paragraphs' binary labels."""
    if len(paragraph_tokens) != len(labels):
        raise ValueError(f"{len(paragraph_tokens)} paragraphs vs {len(labels)} labels")
    if not paragraph_tokens or all(len(toks) == 0 for toks in paragraph_tokens):
        raise EmptySequenceError("document has no tokens to tag")
    tokens: list[str] = []
    spans: list[tuple[int, int]] = []
    tags: list[str] = []
    inside_privileged = False
    for toks, label in zip(paragraph_tokens, labels):
        start = len(tokens)
        tokens.extend(toks)
        spans.append((start, len(tokens)))
        if label:
            for i in range(len(toks)):
                if i == 0 and not inside_privileged:
                    tags.append("B")
                else:
                    tags.append("I")
            if toks:
                inside_privileged = True
        else:
            tags.extend("O" for _ in toks)
            if toks:
                inside_privileged = False
    return BIOSequence(tokens=tokens, paragraph_spans=spans, tags=tags)


def bio_to_paragraph(tags: list[str], paragraph_spans: list[tuple[int, int]],
                     overlap_percent: int) -> list[int]:
    """Per-paragraph 0/1 from word tags: share of B/I words >= threshold."""
    _validate_spans(paragraph_spans, len(tags))
    out = []
    for start, end in paragraph_spans:
        hits = sum(1 for t in tags[start:end] if t in ("B", "I"))
        out.append(int(100.0 * hits / (end - start) >= overlap_percent))
    return out


def span_fractions(tags: list[str], paragraph_spans: list[tuple[int, int]]) -> list[float]:
    """Share of B/I words per paragraph (the tagger's score for display)."""
    _validate_spans(paragraph_spans, len(tags))
    return [
        sum(1 for t in tags[start:end] if t in ("B", "I")) / (end - start)
        for start, end in paragraph_spans
    ]


def _validate_spans(spans: list[tuple[int, int]], n_tokens: int) -> None:
    expected_start = 0
    for start, end in spans:
        if end <= start:
            raise InvalidSpanError(f"zero-length span ({start}, {end})")
        if start != expected_start:
            raise InvalidSpanError(f"spans do not partition the sequence at {start}")
        expected_start = end
    if expected_start != n_tokens:
        raise InvalidSpanError(f"spans cover {expected_start} of {n_tokens} tokens")
