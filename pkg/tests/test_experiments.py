"""Experiment protocol: folds, configs, table structure, rendering."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foia_review.corpus import SCOPE_D0, SCOPE_D0_T0
from foia_review.errors import ConfigurationError
from foia_review.evaluation import Confusion, EvalReport
from foia_review.experiments import (
    ColumnResult,
    ExperimentConfig,
    SideSpec,
    K_BATCHES,
    render_table,
    run_condition,
    stratified_folds,
    table_configs,
    write_table_csv,
)
from foia_review.tuning import ParamGrid

from test_tuning import toy_dataset


class TestFolds:
    @given(st.integers(10, 200), st.floats(0.05, 0.9), st.integers(0, 99))
    @settings(max_examples=60, deadline=None)
    def test_partition_properties(self, n, rate, seed):
        labels = (np.random.default_rng(seed).random(n) < rate).astype(int)
        folds = stratified_folds(labels, 5, seed)
        joined = np.concatenate(folds)
        assert sorted(joined.tolist()) == list(range(n))
        sizes = [len(f) for f in folds]
        assert max(sizes) - min(sizes) <= 1

    def test_deterministic(self):
        labels = [0, 1] * 40
        a = stratified_folds(labels, 5, 3)
        b = stratified_folds(labels, 5, 3)
        assert all((x == y).all() for x, y in zip(a, b))

    def test_stratification_balances_positives(self):
        labels = np.array([1] * 25 + [0] * 75)
        folds = stratified_folds(labels, 5, 0)
        per_fold_pos = [int(np.asarray(labels)[f].sum()) for f in folds]
        assert per_fold_pos == [5, 5, 5, 5, 5]


class TestConfigValidation:
    def test_condition_a_requires_matching_sides(self):
        side = SideSpec("A", K_BATCHES)
        other = SideSpec("A", frozenset({"R4"}))
        with pytest.raises(ConfigurationError):
            ExperimentConfig("A", side, other, SCOPE_D0_T0).validate()

    def test_cv_with_single_fold_rejected(self):
        side = SideSpec("A", K_BATCHES)
        with pytest.raises(ConfigurationError, match="folds"):
            ExperimentConfig("A", side, side, SCOPE_D0_T0, folds=1).validate()

    def test_same_reviewer_overlapping_batches_rejected(self):
        train = SideSpec("A", frozenset({"K1", "K2"}))
        test = SideSpec("A", frozenset({"K2"}))
        with pytest.raises(ConfigurationError, match="share batches"):
            ExperimentConfig("B", train, test, SCOPE_D0_T0).validate()

    def test_condition_b_keeps_reviewer(self):
        train = SideSpec("A", K_BATCHES)
        test = SideSpec("B", frozenset({"R4"}))
        with pytest.raises(ConfigurationError, match="reviewer"):
            ExperimentConfig("B", train, test, SCOPE_D0_T0).validate()

    def test_condition_b_crosses_custodians(self):
        train = SideSpec("A", frozenset({"K1"}))
        test = SideSpec("A", frozenset({"K2"}))
        with pytest.raises(ConfigurationError, match="custodian"):
            ExperimentConfig("B", train, test, SCOPE_D0_T0).validate()

    def test_condition_c_keeps_custodian(self):
        train = SideSpec("B", frozenset({"K2"}))
        test = SideSpec("A", frozenset({"R4"}))
        with pytest.raises(ConfigurationError, match="custodian"):
            ExperimentConfig("C", train, test, SCOPE_D0_T0).validate()

    def test_condition_d_crosses_both(self):
        train = SideSpec("A", frozenset({"R4"}))
        test = SideSpec("A", frozenset({"K2"}))
        with pytest.raises(ConfigurationError):
            ExperimentConfig("D", train, test, SCOPE_D0_T0).validate()

    def test_valid_published_configs(self):
        for table_id in (5, 6, 7, 8, 9, 10):
            for config in table_configs(table_id, seed=1):
                config.validate()


class TestTableConfigs:
    def test_column_counts(self):
        assert len(table_configs(5, 0)) == 4
        assert len(table_configs(6, 0)) == 2
        assert len(table_configs(7, 0)) == 4
        assert len(table_configs(8, 0)) == 4
        assert len(table_configs(9, 0)) == 3
        assert len(table_configs(10, 0)) == 4

    def test_scopes(self):
        assert all(c.scope == SCOPE_D0_T0 for c in table_configs(5, 0))
        assert all(c.scope.name == "d0t0e0" for c in table_configs(9, 0))
        assert all(c.scope == SCOPE_D0 for c in table_configs(10, 0))

    def test_unknown_table(self):
        with pytest.raises(ValueError):
            table_configs(12, 0)


def _report(f1, n=100):
    return EvalReport(f1, f1, f1, 1.0, n, Confusion())


class TestRendering:
    def _column(self):
        side = SideSpec("A", K_BATCHES)
        config = ExperimentConfig("A", side, side, SCOPE_D0_T0, seed=0)
        column = ColumnResult(
            title="Train cross-validate / Test A: K1,K2,K3,K5",
            config=config,
            reports={"lr": _report(70.3), "all1s": _report(49.3)},
        )
        column.finish()
        return column

    def test_bold_and_underline_markers(self):
        text = render_table([self._column()], families=("lr", "all1s"))
        assert "**70.3±1.0**" in text
        assert "_**70.3" in text  # significant over the baseline
        assert "49.3±1.0" in text

    def test_tied_best_bolds_both_and_warns(self, capsys):
        column = self._column()
        column.reports["svm"] = _report(70.3)
        column.finish()
        text = render_table([column], families=("lr", "svm", "all1s"))
        assert text.count("**") == 4  # two bolded cells, two markers each
        assert "tied best F1" in capsys.readouterr().err

    def test_csv_output(self, tmp_path):
        out = tmp_path / "table.csv"
        write_table_csv([self._column()], out, families=("lr", "all1s"))
        rows = out.read_text().splitlines()
        assert rows[0].startswith("column,model,")
        assert len(rows) == 3


TINY_GRIDS = {
    "lr": ParamGrid("lr", (("use_idf", (False,)), ("stemmer", ("none",)),
                           ("C", (1.0,)), ("threshold", (0.4, 0.5)))),
    "svm": ParamGrid("svm", (("use_idf", (False,)), ("stemmer", ("none",)),
                             ("C", (1.0,)), ("kernel", ("linear",)))),
    "bio": ParamGrid("bio", (("c1", (0.1,)), ("c2", (0.1,)), ("overlap", (10, 50)))),
}


class TestRunCondition:
    @pytest.fixture(scope="class")
    def tiny_corpus(self, tmp_path_factory):
        """A miniature two-batch collection exercising the full runner."""
        import json
        import random

        rng = random.Random(5)
        tmp = tmp_path_factory.mktemp("tinycorpus")
        rows = []
        pos_words = "options recommend propose consider draft urge".split()
        neg_words = "today report data released schedule press".split()
        for batch, custodian, n_docs in (("K1", "Kagan", 12), ("R4", "Rice", 8)):
            for d in range(n_docs):
                lines = []
                for i in range(4):
                    label = "D1" if rng.random() < 0.4 else "D0"
                    pool = pos_words if label == "D1" else neg_words
                    text = " ".join(rng.choice(pool) for _ in range(10))
                    lines.append(f"{label}//\n{text}")
                path = tmp / f"{batch}_{d}.txt"
                path.write_text("\n".join(lines) + "\n")
                rows.append({
                    "doc_id": f"{batch}/f/{d:03d}", "path": path.name,
                    "batch": batch, "custodian": custodian, "file_name": "F",
                    "topic": "Welfare" if batch == "K1" else "Budget",
                    "reviewer": "A",
                })
        manifest = tmp / "manifest.jsonl"
        with open(manifest, "w") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")
        from foia_review.corpus import load_collection

        return load_collection(manifest)

    def test_cross_validation_pools_predictions(self, tiny_corpus):
        side = SideSpec("A", frozenset({"K1"}))
        config = ExperimentConfig("A", side, side, SCOPE_D0_T0, folds=3, seed=2)
        column = run_condition(tiny_corpus, config, families=("lr", "keyword", "all1s"),
                               grids=TINY_GRIDS)
        report = column.reports["lr"]
        assert report.n == 48  # pooled n equals the dataset size
        assert column.reports["all1s"].recall == 100.0
        assert len(column.chosen_params["lr"]) == 3  # one per fold

    def test_train_test_condition(self, tiny_corpus):
        config = ExperimentConfig(
            "B",
            SideSpec("A", frozenset({"K1"})),
            SideSpec("A", frozenset({"R4"})),
            SCOPE_D0_T0,
            seed=2,
        )
        column = run_condition(tiny_corpus, config, families=("lr", "bio", "all1s"),
                               grids=TINY_GRIDS)
        assert column.reports["lr"].n == 32
        assert column.reports["bio"].n == 32

    def test_determinism(self, tiny_corpus):
        side = SideSpec("A", frozenset({"K1"}))
        config = ExperimentConfig("A", side, side, SCOPE_D0_T0, folds=3, seed=2)
        a = run_condition(tiny_corpus, config, families=("lr", "all1s"), grids=TINY_GRIDS)
        b = run_condition(tiny_corpus, config, families=("lr", "all1s"), grids=TINY_GRIDS)
        assert render_table([a]) == render_table([b])
        assert a.chosen_params == b.chosen_params
