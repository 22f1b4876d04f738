"""Shared fixtures: a small marker-format document and the full collection."""

from __future__ import annotations

from pathlib import Path

import pytest

from foia_review.corpus import Corpus, Document, DocumentMeta, Paragraph, load_collection

REPO_ROOT = Path(__file__).resolve().parent.parent
MANIFEST = REPO_ROOT / "data" / "manifest.jsonl"

# An annotated e-mail in the collection's marker grammar: indented markers,
# the bare `0//` shorthand, multi-line paragraphs.  Labels run
# [T0, D1, D1, D1, D0, D0]; one keyword token sits in the second body
# paragraph ("discussion") and one in the fifth ("discuss").
EMAIL_FIXTURE = """\
  T0//
Diana Fortuna\t03/09/98 11:30:00 AM Record Type: Record
To: Bruce Reed/OPD/EOP cc: Elena Kagan/OPD/EOP
Subject: Childhood Immunization Schedule
  D1//
We think the immunization outreach program needs a stronger push before
the spring announcement, and I would lean toward the larger option.
  D1//
I had a long discussion with the working group about whether the
targeted approach is necessary or whether we should revise the draft.
  D1//
My own sense is that the language on coverage is too narrow, and the
counter we received from the agency does not help us.
  0//
The committee released its report today. Current data show immunization
rates at 78 percent statewide, according to the published figures.
  0//
I will let you know when the final numbers are posted. We can discuss
scheduling after the press briefing next week.
"""

EMAIL_LABELS = ["T0", "D1", "D1", "D1", "D0", "D0"]


@pytest.fixture(scope="session")
def email_meta() -> DocumentMeta:
    return DocumentMeta(
        doc_id="K3/emails_received/999",
        batch="K3",
        custodian="Kagan",
        file_name="Emails Received",
        topic="Miscellaneous Emails",
        reviewer="A",
    )


@pytest.fixture(scope="session")
def collection() -> Corpus:
    return load_collection(MANIFEST)


def make_document(labels: list[str], texts: list[str] | None = None,
                  doc_id: str = "K1/test/000", batch: str = "K1",
                  reviewer: str = "A", topic: str = "Welfare") -> Document:
    texts = texts or [f"paragraph body {i} filler words" for i in range(len(labels))]
    paragraphs = [
        Paragraph(id=f"{doc_id}/{i:03d}", ordinal=i, text=texts[i],
                  labels={reviewer: label})
        for i, label in enumerate(labels)
    ]
    return Document(id=doc_id, batch=batch, custodian="Kagan", file_name="test",
                    topic=topic, paragraphs=paragraphs)
