"""Invariants of the shipped collection (batch counts, labels, agreement)."""

from __future__ import annotations

import pytest

from foia_review.baselines import keyword_predict_many
from foia_review.corpus import (
    SCOPE_D0,
    SCOPE_D0_T0,
    SCOPE_D0_T0_E0,
    TOPICS,
    DocumentMeta,
    parse_annotated_document,
    select,
    select_topic,
    serialize_document,
)
from foia_review.evaluation import cohens_kappa, confusion

BATCH_COUNTS = {"K1": 523, "K2": 447, "K3": 670, "R4": 466, "K5": 631, "E5": 286}

# Per-topic paragraph and positive counts under reviewer A, exempt vs
# decided+trivial zeros.  Drugs absorbs the two-paragraph and one-positive
# slack needed to keep batch totals and the overall prevalence consistent.
TOPIC_COUNTS = {
    "Drugs": (701, 244),
    "Health": (297, 69),
    "Tax Proposals": (253, 95),
    "Welfare": (245, 58),
    "Child Support": (216, 37),
    "Service": (198, 73),
    "Miscellaneous Emails": (188, 38),
    "Disability": (105, 23),
    "Education": (103, 27),
    "Budget": (100, 46),
    "Kids": (92, 65),
    "Environment": (73, 30),
    "Social Security": (72, 27),
    "Fathers": (45, 7),
    "Family": (30, 6),
    "Superfund": (19, 11),
}


def test_batch_paragraph_counts(collection):
    assert collection.paragraph_counts == BATCH_COUNTS
    assert sum(collection.paragraph_counts.values()) == 3023


def test_reviewers_present(collection):
    assert collection.reviewers == {"A", "B", "AB"}


def test_doubly_annotated_batch(collection):
    for doc, paragraph in collection.iter_paragraphs({"K2"}):
        assert set(paragraph.labels) == {"A", "B", "AB"}
    for doc, paragraph in collection.iter_paragraphs({"K1", "K3", "R4", "K5", "E5"}):
        assert set(paragraph.labels) == {"A"}


def test_round_trip_identity_over_collection(collection):
    for doc in collection.documents:
        for reviewer in doc.reviewers():
            meta = DocumentMeta(doc.id, doc.batch, doc.custodian, doc.file_name,
                                doc.topic, reviewer)
            again = parse_annotated_document(serialize_document(doc, reviewer), meta)
            assert [p.text for p in again.paragraphs] == [p.text for p in doc.paragraphs]
            assert [p.labels[reviewer] for p in again.paragraphs] == [
                p.labels[reviewer] for p in doc.paragraphs
            ]


@pytest.mark.parametrize(
    "batches,reviewer,scope,n,positives",
    [
        ({"K1", "K2", "K3", "K5"}, "A", SCOPE_D0_T0, 2271, 743),
        ({"R4"}, "A", SCOPE_D0_T0, 466, 113),
        ({"K1", "K3", "K5"}, "A", SCOPE_D0_T0, 1824, 577),
        ({"K2"}, "B", SCOPE_D0_T0, 447, 229),
        ({"K2"}, "AB", SCOPE_D0_T0, 447, 227),
        ({"K1", "K2", "K3", "K5"}, "A", SCOPE_D0, 1968, 743),
        ({"K2"}, "AB", SCOPE_D0, 346, 227),
        ({"K1", "K2", "K3", "K5", "E5"}, "A", SCOPE_D0_T0_E0, 2557, 743),
        ({"K1", "K3", "K5", "E5"}, "A", SCOPE_D0_T0_E0, 2110, 577),
        ({"E5"}, "A", SCOPE_D0_T0_E0, 286, 0),
    ],
)
def test_selection_sizes(collection, batches, reviewer, scope, n, positives):
    data = select(collection, batches, reviewer, scope)
    assert (len(data), data.positives) == (n, positives)


def test_narrow_scope_has_no_trivial_paragraphs(collection):
    data = select(collection, {"K1", "K2", "K3", "K5"}, "A", SCOPE_D0)
    for ex in data.examples:
        assert collection.paragraph(ex.paragraph_id).labels["A"] != "T0"


def test_select_size_identity(collection):
    """select() size equals positives plus in-scope negatives."""
    for scope in (SCOPE_D0, SCOPE_D0_T0):
        data = select(collection, {"K1"}, "A", scope)
        from collections import Counter

        counts = Counter(
            p.labels["A"] for _, p in collection.iter_paragraphs({"K1"})
        )
        expected = counts["D1"] + sum(counts[c] for c in scope.negatives)
        assert len(data) == expected


def test_keyword_confusions(collection):
    expectations = [
        ({"K1", "K2", "K3", "K5"}, "A", 238, 450),
        ({"R4"}, "A", 42, 74),
        ({"K2"}, "B", 68, 79),
        ({"K2"}, "AB", 68, 79),
        ({"K1", "K3", "K5"}, "A", 180, 371),
    ]
    for batches, reviewer, tp, hits in expectations:
        data = select(collection, batches, reviewer, SCOPE_D0_T0)
        cm = confusion(keyword_predict_many(data.texts), data.labels)
        assert (cm.tp, cm.tp + cm.fp) == (tp, hits)


def test_topic_counts(collection):
    assert set(TOPICS) == set(TOPIC_COUNTS)
    for topic, (n, positives) in TOPIC_COUNTS.items():
        data = select_topic(collection, topic, "A", SCOPE_D0_T0)
        assert (len(data), data.positives) == (n, positives), topic


def test_agreement_table(collection):
    a_bin, b_bin = [], []
    for _, paragraph in collection.iter_paragraphs({"K2"}):
        a_bin.append(int(paragraph.labels["A"] == "D1"))
        b_bin.append(int(paragraph.labels["B"] == "D1"))
    cells = {
        (0, 0): sum(1 for a, b in zip(a_bin, b_bin) if (a, b) == (0, 0)),
        (0, 1): sum(1 for a, b in zip(a_bin, b_bin) if (a, b) == (0, 1)),
        (1, 0): sum(1 for a, b in zip(a_bin, b_bin) if (a, b) == (1, 0)),
        (1, 1): sum(1 for a, b in zip(a_bin, b_bin) if (a, b) == (1, 1)),
    }
    assert cells == {(0, 0): 212, (0, 1): 69, (1, 0): 6, (1, 1): 160}
    assert cohens_kappa(a_bin, b_bin) == pytest.approx(0.6665, abs=1e-3)


def test_vocabulary_contains_topic_terms(collection):
    from foia_review.features import FeatureConfig, build_vocabulary

    data = select(collection, {"K1", "K2", "K3", "K5"}, "A", SCOPE_D0_T0)
    vocab = build_vocabulary(data.texts, FeatureConfig())
    for term in ("option", "vouchers", "radiation"):
        assert term in vocab.index
