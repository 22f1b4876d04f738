"""Confusion counts, P/R/F1 with normal-approximation CIs, and agreement.

All metric values are kept at full precision internally; rounding to one
decimal (half away from zero) happens only at presentation time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ReviewError


class AlignmentError(ReviewError):
    """Prediction and gold sequences do not line up."""


def round1(x: float) -> float:
    """Round to one decimal, half away from zero."""
    return math.floor(abs(x) * 10 + 0.5) / 10 * (1 if x >= 0 else -1)


@dataclass(frozen=True)
class Confusion:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def confusion(predictions, gold) -> Confusion:
    """2x2 counts with the exempt code as the positive class."""
    if len(predictions) != len(gold):
        raise AlignmentError(f"{len(predictions)} predictions vs {len(gold)} gold labels")
    tp = fp = fn = tn = 0
    for pred, actual in zip(predictions, gold):
        if actual:
            if pred:
                tp += 1
            else:
                fn += 1
        else:
            if pred:
                fp += 1
            else:
                tn += 1
    return Confusion(tp, fp, fn, tn)


def prf(cm: Confusion) -> tuple[float, float, float]:
    """(precision, recall, F1) as percentages; 0/0 cases report 0."""
    precision = 100.0 * cm.tp / (cm.tp + cm.fp) if (cm.tp + cm.fp) else 0.0
    recall = 100.0 * cm.tp / (cm.tp + cm.fn) if (cm.tp + cm.fn) else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) else 0.0
    return precision, recall, f1


def f1_ci(f1_percent: float, n: int) -> float:
    """95% half-width for an F1 percentage under the normal approximation."""
    if n < 1:
        raise ValueError("confidence interval undefined for n < 1")
    if not 0.0 <= f1_percent <= 100.0:
        raise ValueError(f"F1 out of range: {f1_percent}")
    f = f1_percent / 100.0
    return 100.0 * 1.96 * math.sqrt(f * (1.0 - f) / n)


@dataclass(frozen=True)
class EvalReport:
    """One table cell: P/R/F1 (percent), CI half-width, n, and counts."""

    precision: float
    recall: float
    f1: float
    ci_half_width: float
    n: int
    confusion: Confusion
    degenerate: bool = False

    @classmethod
    def from_confusion(cls, cm: Confusion) -> "EvalReport":
        p, r, f1 = prf(cm)
        degenerate = (cm.tp + cm.fp == 0) or (cm.tp + cm.fn == 0) or (p + r == 0)
        return cls(p, r, f1, f1_ci(f1, cm.n) if cm.n else 0.0, cm.n, cm, degenerate)

    def rounded(self) -> tuple[float, float, float, float]:
        return (round1(self.precision), round1(self.recall), round1(self.f1),
                round1(self.ci_half_width))

    def __str__(self) -> str:
        p, r, f1, ci = self.rounded()
        return f"P={p:.1f} R={r:.1f} F1={f1:.1f}±{ci:.1f} (n={self.n})"


def significance_vs(reference: EvalReport, other: EvalReport) -> bool:
    """True when each F1 lies outside the other's 95% interval."""
    if reference.n != other.n:
        raise AlignmentError(
            f"reports cover different test sets (n={reference.n} vs n={other.n})"
        )
    delta = abs(reference.f1 - other.f1)
    return delta > reference.ci_half_width and delta > other.ci_half_width


def cohens_kappa(labels_a, labels_b) -> float:
    """Chance-corrected agreement between two aligned label sequences."""
    if len(labels_a) != len(labels_b):
        raise AlignmentError(f"{len(labels_a)} vs {len(labels_b)} labels")
    n = len(labels_a)
    if n == 0:
        raise ValueError("kappa undefined on empty input")
    categories = sorted(set(labels_a) | set(labels_b))
    observed = 0
    marg_a = {c: 0 for c in categories}
    marg_b = {c: 0 for c in categories}
    for a, b in zip(labels_a, labels_b):
        if a == b:
            observed += 1
        marg_a[a] += 1
        marg_b[b] += 1
    p_o = observed / n
    p_e = sum(marg_a[c] * marg_b[c] for c in categories) / (n * n)
    if p_e == 1.0:
        raise ValueError("kappa undefined: expected agreement is 1")
    return (p_o - p_e) / (1.0 - p_e)


def kappa_from_counts(both_neg: int, a_neg_b_pos: int, a_pos_b_neg: int, both_pos: int) -> float:
    """Kappa from 2x2 agreement-table counts (rows = first rater)."""
    labels_a = [0] * (both_neg + a_neg_b_pos) + [1] * (a_pos_b_neg + both_pos)
    labels_b = ([0] * both_neg + [1] * a_neg_b_pos + [0] * a_pos_b_neg + [1] * both_pos)
    return cohens_kappa(labels_a, labels_b)
