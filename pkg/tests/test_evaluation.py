"""Metrics: confusion, P/R/F1, confidence intervals, significance, kappa."""

from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from foia_review.evaluation import (
    AlignmentError,
    Confusion,
    EvalReport,
    cohens_kappa,
    confusion,
    f1_ci,
    kappa_from_counts,
    prf,
    round1,
    significance_vs,
)


class TestConfusion:
    def test_basic_counts(self):
        cm = confusion([1, 1, 0], [1, 0, 0])
        assert (cm.tp, cm.fp, cm.fn, cm.tn) == (1, 1, 0, 1)

    def test_all_ones_prediction(self):
        gold = [1] * 743 + [0] * 1528
        cm = confusion([1] * 2271, gold)
        assert (cm.tp, cm.fp, cm.fn) == (743, 1528, 0)

    def test_empty(self):
        cm = confusion([], [])
        assert cm == Confusion(0, 0, 0, 0)

    def test_length_mismatch(self):
        with pytest.raises(AlignmentError):
            confusion([1], [1, 0])


class TestPRF:
    def test_prevalence_cell(self):
        p, r, f1 = prf(Confusion(tp=743, fp=1528, fn=0, tn=0))
        assert round1(p) == 32.7
        assert r == 100.0
        assert round1(f1) == 49.3

    def test_degenerate_all_zero(self):
        assert prf(Confusion()) == (0.0, 0.0, 0.0)

    def test_harmonic_mean_of_equals(self):
        p, r, f1 = prf(Confusion(tp=30, fp=10, fn=10, tn=50))
        assert p == r == f1

    def test_report_flags_degenerate(self):
        report = EvalReport.from_confusion(Confusion(tp=0, fp=0, fn=5, tn=5))
        assert report.degenerate
        assert report.f1 == 0.0


class TestCI:
    @pytest.mark.parametrize(
        "f1,n,expected",
        [
            (49.3, 2271, 2.1),
            (38.7, 466, 4.4),
            (67.7, 447, 4.3),
            (45.0, 2557, 1.9),
            (54.8, 1968, 2.2),
            (79.3, 346, 4.3),
        ],
    )
    def test_published_anchor_cells(self, f1, n, expected):
        assert round1(f1_ci(f1, n)) == pytest.approx(expected, abs=0.1)

    def test_variance_vanishes_at_extremes(self):
        assert f1_ci(0.0, 50) == 0.0
        assert f1_ci(100.0, 50) == 0.0

    def test_zero_n_rejected(self):
        with pytest.raises(ValueError):
            f1_ci(50.0, 0)

    @given(st.floats(0, 100), st.integers(1, 10_000))
    def test_symmetry(self, f1, n):
        assert f1_ci(f1, n) == pytest.approx(f1_ci(100 - f1, n), abs=1e-9)

    @given(st.floats(0.1, 99.9), st.integers(1, 5_000))
    def test_monotone_decreasing_in_n(self, f1, n):
        assert f1_ci(f1, n) >= f1_ci(f1, n * 2)


def _report(f1, n):
    # build a synthetic report with the requested headline numbers
    return EvalReport(precision=f1, recall=f1, f1=f1, ci_half_width=f1_ci(f1, n),
                      n=n, confusion=Confusion())


class TestSignificance:
    def test_clear_separation(self):
        assert significance_vs(_report(70.3, 2271), _report(49.3, 2271))

    def test_lower_but_separated_is_still_disjoint(self):
        assert significance_vs(_report(39.9, 2271), _report(49.3, 2271))

    def test_identical_reports(self):
        assert not significance_vs(_report(49.3, 2271), _report(49.3, 2271))

    def test_mismatched_n(self):
        with pytest.raises(AlignmentError):
            significance_vs(_report(50.0, 100), _report(60.0, 200))


class TestKappa:
    def test_agreement_table_counts(self):
        kappa = kappa_from_counts(212, 69, 6, 160)
        assert kappa == pytest.approx(0.6665, abs=1e-3)
        assert round(kappa, 2) == 0.67

    def test_perfect_agreement(self):
        assert cohens_kappa([0, 1, 0, 1], [0, 1, 0, 1]) == 1.0

    def test_observed_equals_expected(self):
        # one rater constant: p_o equals p_e, kappa is 0
        a = [1] * 10
        b = [1] * 5 + [0] * 5
        assert cohens_kappa(a, b) == pytest.approx(0.0)

    def test_alignment_checked(self):
        with pytest.raises(AlignmentError):
            cohens_kappa([1], [1, 0])

    def test_degenerate_expected_agreement(self):
        with pytest.raises(ValueError):
            cohens_kappa([1, 1], [1, 1])

    @given(st.lists(st.tuples(st.integers(0, 1), st.integers(0, 1)),
                    min_size=2, max_size=60))
    def test_kappa_bounds(self, pairs):
        a = [x for x, _ in pairs]
        b = [y for _, y in pairs]
        try:
            kappa = cohens_kappa(a, b)
        except ValueError:
            return
        assert -1.0 - 1e-9 <= kappa <= 1.0 + 1e-9


def test_round1_half_away_from_zero():
    assert round1(2.05) == 2.1
    assert round1(2.04) == 2.0
    assert round1(-2.05) == -2.1
    assert round1(49.25) == 49.3
