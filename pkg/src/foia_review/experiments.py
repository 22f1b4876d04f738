"""Experiment protocol: conditions A-D, ablations, topics, and tables.

Condition A is 5-fold paragraph-scale cross-validation with nested tuning
per fold; predictions are pooled across folds into one confusion before
computing P/R/F1, so n equals the full dataset size.  Conditions B-D are
a single tune-train on the training side.  Keyword and all-1s rows need
no training.
"""

from __future__ import annotations

import csv
import io
import sys
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .corpus import Corpus, DataSet, LabelScope, select, select_topic
from .corpus import SCOPE_D0, SCOPE_D0_T0, SCOPE_D0_T0_E0, TOPICS, custodian_for_batch
from .errors import ConfigurationError
from .evaluation import EvalReport, confusion, round1, significance_vs
from .linear_model import top_weights
from .pipeline import FAMILIES, TRAINED_FAMILIES, fit_pipeline
from .tuning import ParamGrid, default_grid, tune_and_train

K_BATCHES = frozenset({"K1", "K2", "K3", "K5"})
K135 = frozenset({"K1", "K3", "K5"})


@dataclass(frozen=True)
class SideSpec:
    reviewer: str
    batches: frozenset[str]

    def describe(self) -> str:
        order = ("K1", "K2", "K3", "R4", "K5", "E5")
        parts = [b for b in order if b in self.batches]
        return f"{self.reviewer}: {','.join(parts)}"

    def custodians(self) -> frozenset[str]:
        return frozenset(custodian_for_batch(b) for b in self.batches)


@dataclass(frozen=True)
class ExperimentConfig:
    condition: str
    train: SideSpec
    test: SideSpec
    scope: LabelScope
    folds: int = 5
    seed: int = 0

    def validate(self) -> None:
        cross_validated = self.train == self.test
        if cross_validated:
            if self.folds < 2:
                raise ConfigurationError(
                    "cross-validation over identical train/test needs folds >= 2"
                )
        else:
            same_reviewer = self.train.reviewer == self.test.reviewer
            overlapping = bool(self.train.batches & self.test.batches)
            if same_reviewer and overlapping:
                raise ConfigurationError(
                    "train/test share batches under one reviewer; use distinct "
                    "reviewers or disjoint batch sets"
                )
        if self.condition == "A" and not cross_validated:
            raise ConfigurationError("condition A requires train_spec == test_spec")
        if self.condition == "B" and self.train.reviewer != self.test.reviewer:
            raise ConfigurationError("condition B keeps the reviewer fixed")
        if self.condition == "B" and self.train.custodians() & self.test.custodians():
            raise ConfigurationError("condition B crosses custodians")
        if self.condition == "C" and self.train.reviewer == self.test.reviewer:
            raise ConfigurationError("condition C crosses reviewers")
        if self.condition == "C" and self.train.custodians() != self.test.custodians():
            raise ConfigurationError("condition C keeps the custodian fixed")
        if self.condition == "D" and (
            self.train.reviewer == self.test.reviewer
            or self.train.custodians() & self.test.custodians()
        ):
            raise ConfigurationError("condition D crosses both reviewer and custodian")


@dataclass
class ColumnResult:
    title: str
    config: ExperimentConfig
    reports: dict[str, EvalReport]
    significant: dict[str, bool] = field(default_factory=dict)
    chosen_params: dict[str, list[dict]] = field(default_factory=dict)

    def finish(self) -> None:
        baseline = self.reports.get("all1s")
        for family, report in self.reports.items():
            self.significant[family] = bool(
                baseline is not None
                and family != "all1s"
                and significance_vs(report, baseline)
                and report.f1 > baseline.f1
            )


def stratified_folds(labels, k: int, seed: int) -> list[np.ndarray]:
    """Deterministic stratified partition; fold sizes differ by at most 1."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    extra_offset = 0
    for cls in (1, 0):
        members = np.flatnonzero(labels == cls)
        members = members[rng.permutation(len(members))]
        base = len(members) // k
        remainder = len(members) - base * k
        start = 0
        sizes = []
        for f in range(k):
            extra = 1 if (f - extra_offset) % k < remainder else 0
            sizes.append(base + extra)
        for f, size in enumerate(sizes):
            folds[f].extend(members[start:start + size])
            start += size
        extra_offset += remainder
    return [np.array(sorted(f), dtype=int) for f in folds]


def _fold_seed(seed: int, fold: int, family: str) -> int:
    entropy = np.random.SeedSequence((seed, fold, zlib.crc32(family.encode())))
    return int(entropy.generate_state(1)[0])


def _fit_fold(args):
    family, train_data, test_data, seed, retrain_on_full, grid = args
    model, result = tune_and_train(
        family, train_data, seed=seed, retrain_on_full=retrain_on_full, grid=grid
    )
    # Training paragraphs of documents split by fold assignment serve as
    # decoding context for the sequence model; disjoint train/test designs
    # share no documents, so this is a no-op there.
    prediction = model.predict(test_data, context=train_data)
    return prediction.labels, result.best_params


def run_condition(corpus: Corpus, config: ExperimentConfig,
                  families: tuple[str, ...] = FAMILIES, jobs: int = 1,
                  retrain_on_full: bool = True,
                  grids: dict[str, ParamGrid] | None = None) -> ColumnResult:
    """Evaluate one table column."""
    config.validate()
    test_data = select(corpus, set(config.test.batches), config.test.reviewer, config.scope)
    column = ColumnResult(
        title=_column_title(config),
        config=config,
        reports={},
    )

    trained = [f for f in families if f in TRAINED_FAMILIES]
    tasks = []
    if config.train == config.test:
        folds = stratified_folds(test_data.labels, config.folds, config.seed)
        all_idx = np.concatenate(folds) if folds else np.array([], dtype=int)
        assert len(all_idx) == len(test_data) and len(set(all_idx.tolist())) == len(test_data)
        for family in trained:
            grid = grids.get(family) if grids else None
            for fold_no, test_idx in enumerate(folds):
                train_idx = np.setdiff1d(np.arange(len(test_data)), test_idx)
                tasks.append(
                    (family, fold_no, test_idx,
                     (family, test_data.subset(train_idx), test_data.subset(test_idx),
                      _fold_seed(config.seed, fold_no, family), retrain_on_full, grid))
                )
    else:
        train_data = select(corpus, set(config.train.batches), config.train.reviewer,
                            config.scope)
        for family in trained:
            grid = grids.get(family) if grids else None
            tasks.append(
                (family, 0, np.arange(len(test_data)),
                 (family, train_data, test_data,
                  _fold_seed(config.seed, 0, family), retrain_on_full, grid))
            )

    outputs: dict[tuple[str, int], tuple] = {}
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for (family, fold_no, _, _), result in zip(
                tasks, pool.map(_fit_fold, [t[3] for t in tasks])
            ):
                outputs[(family, fold_no)] = result
    else:
        for family, fold_no, _, args in tasks:
            outputs[(family, fold_no)] = _fit_fold(args)

    gold = np.asarray(test_data.labels)
    for family in trained:
        pooled = np.zeros(len(test_data), dtype=int)
        params_log = []
        for task_family, fold_no, test_idx, _ in tasks:
            if task_family != family:
                continue
            labels, best_params = outputs[(family, fold_no)]
            pooled[test_idx] = labels
            params_log.append(best_params)
        column.reports[family] = EvalReport.from_confusion(confusion(pooled, gold))
        column.chosen_params[family] = params_log

    for family in families:
        if family in TRAINED_FAMILIES:
            continue
        prediction = fit_pipeline(family, {}, test_data).predict(test_data)
        column.reports[family] = EvalReport.from_confusion(
            confusion(prediction.labels, gold)
        )
    column.finish()
    return column


def _column_title(config: ExperimentConfig) -> str:
    if config.train == config.test:
        return f"Train cross-validate / Test {config.test.describe()}"
    return f"Train {config.train.describe()} / Test {config.test.describe()}"


def _cv(reviewer: str, batches: frozenset[str], scope: LabelScope, condition: str,
        seed: int) -> ExperimentConfig:
    side = SideSpec(reviewer, batches)
    return ExperimentConfig(condition, side, side, scope, folds=5, seed=seed)


def _tt(train_rev: str, train_batches: frozenset[str], test_rev: str,
        test_batches: frozenset[str], scope: LabelScope, condition: str,
        seed: int) -> ExperimentConfig:
    return ExperimentConfig(
        condition,
        SideSpec(train_rev, frozenset(train_batches)),
        SideSpec(test_rev, frozenset(test_batches)),
        scope,
        seed=seed,
    )


def table_configs(table_id: int, seed: int) -> list[ExperimentConfig]:
    """Column definitions for the published result tables."""
    d0t0, d0e, d0 = SCOPE_D0_T0, SCOPE_D0_T0_E0, SCOPE_D0
    ke5 = K_BATCHES | {"E5"}
    k135e5 = K135 | {"E5"}
    r4 = frozenset({"R4"})
    k2 = frozenset({"K2"})
    if table_id == 5:
        return [
            _cv("A", K_BATCHES, d0t0, "A", seed),
            _cv("A", r4, d0t0, "A", seed),
            _cv("B", k2, d0t0, "A", seed),
            _cv("AB", k2, d0t0, "A", seed),
        ]
    if table_id == 6:
        return [
            _tt("A", K_BATCHES, "A", r4, d0t0, "B", seed),
            _tt("A", r4, "A", K_BATCHES, d0t0, "B", seed),
        ]
    if table_id == 7:
        return [
            _tt("A", K135, "B", k2, d0t0, "C", seed),
            _tt("A", K135, "AB", k2, d0t0, "C", seed),
            _tt("B", k2, "A", K135, d0t0, "C", seed),
            _tt("AB", k2, "A", K135, d0t0, "C", seed),
        ]
    if table_id == 8:
        return [
            _tt("A", r4, "B", k2, d0t0, "D", seed),
            _tt("A", r4, "AB", k2, d0t0, "D", seed),
            _tt("B", k2, "A", r4, d0t0, "D", seed),
            _tt("AB", k2, "A", r4, d0t0, "D", seed),
        ]
    if table_id == 9:
        return [
            _cv("A", ke5, d0e, "easy-zeros", seed),
            _tt("A", ke5, "A", r4, d0e, "easy-zeros", seed),
            _tt("B", k2, "A", k135e5, d0e, "easy-zeros", seed),
        ]
    if table_id == 10:
        return [
            _cv("A", K_BATCHES, d0, "non-trivial", seed),
            _tt("A", r4, "A", K_BATCHES, d0, "non-trivial", seed),
            _tt("A", K135, "AB", k2, d0, "non-trivial", seed),
            _tt("A", r4, "AB", k2, d0, "non-trivial", seed),
        ]
    raise ValueError(f"no column table with id {table_id}")


def run_table(corpus: Corpus, table_id: int, seed: int,
              families: tuple[str, ...] = FAMILIES, jobs: int = 1,
              grids: dict[str, ParamGrid] | None = None) -> list[ColumnResult]:
    return [
        run_condition(corpus, config, families=families, jobs=jobs, grids=grids)
        for config in table_configs(table_id, seed)
    ]


def run_easy_zeros(corpus: Corpus, seed: int, families: tuple[str, ...] = FAMILIES,
                   jobs: int = 1) -> list[ColumnResult]:
    """Batch-E5 ablation (the three published variants)."""
    return run_table(corpus, 9, seed, families=families, jobs=jobs)


def run_non_trivial(corpus: Corpus, seed: int, families: tuple[str, ...] = FAMILIES,
                    jobs: int = 1) -> list[ColumnResult]:
    """Header/signature exclusion: positives against decided zeros only."""
    columns = run_table(corpus, 10, seed, families=families, jobs=jobs)
    for column in columns:
        test = select(corpus, set(column.config.test.batches),
                      column.config.test.reviewer, column.config.scope)
        for ex in test.examples:
            paragraph = corpus.paragraph(ex.paragraph_id)
            assert paragraph.labels[column.config.test.reviewer] != "T0"
    return columns


@dataclass
class TopicResult:
    topic: str
    n: int
    reports: dict[str, EvalReport]
    significant: dict[str, bool] = field(default_factory=dict)


def leave_one_topic_out(corpus: Corpus, scope: LabelScope = SCOPE_D0_T0,
                        families: tuple[str, ...] = FAMILIES, seed: int = 0,
                        jobs: int = 1, reviewer: str = "A") -> list[TopicResult]:
    """Test on each topic after tuning and training on all other topics."""
    results: list[TopicResult] = []
    topic_order = sorted(
        TOPICS,
        key=lambda t: (-len(select_topic(corpus, t, reviewer, scope)), TOPICS.index(t)),
    )
    trained = [f for f in families if f in TRAINED_FAMILIES]
    tasks = []
    for topic in topic_order:
        test_data = select_topic(corpus, topic, reviewer, scope)
        if len(test_data) == 0:
            print(f"warning: topic {topic!r} has no paragraphs; skipped", file=sys.stderr)
            continue
        train_data = select_topic(corpus, topic, reviewer, scope, exclude=True)
        for family in trained:
            tasks.append((topic, family,
                          (family, train_data, test_data,
                           _fold_seed(seed, 0, f"{topic}/{family}"), True, None)))

    outputs: dict[tuple[str, str], tuple] = {}
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for (topic, family, _), out in zip(
                tasks, pool.map(_fit_fold, [t[2] for t in tasks])
            ):
                outputs[(topic, family)] = out
    else:
        for topic, family, args in tasks:
            outputs[(topic, family)] = _fit_fold(args)

    for topic in topic_order:
        test_data = select_topic(corpus, topic, reviewer, scope)
        if len(test_data) == 0:
            continue
        gold = np.asarray(test_data.labels)
        reports: dict[str, EvalReport] = {}
        for family in families:
            if family in TRAINED_FAMILIES:
                labels, _ = outputs[(topic, family)]
            else:
                labels = fit_pipeline(family, {}, test_data).predict(test_data).labels
            reports[family] = EvalReport.from_confusion(confusion(labels, gold))
        result = TopicResult(topic=topic, n=len(test_data), reports=reports)
        baseline = reports.get("all1s")
        for family, report in reports.items():
            result.significant[family] = bool(
                baseline is not None and family != "all1s"
                and significance_vs(report, baseline) and report.f1 > baseline.f1
            )
        results.append(result)
    return results


def top_words_table(corpus: Corpus, seed: int, k: int = 20,
                    grid: ParamGrid | None = None) -> tuple[list[str], list[str]]:
    """Most positive / most negative terms from the first cross-validation
    fold of the same-reviewer, same-custodian condition."""
    data = select(corpus, set(K_BATCHES), "A", SCOPE_D0_T0)
    folds = stratified_folds(data.labels, 5, seed)
    train_idx = np.setdiff1d(np.arange(len(data)), folds[0])
    model, _ = tune_and_train(
        "lr", data.subset(train_idx), seed=_fold_seed(seed, 0, "lr"),
        grid=grid or default_grid("lr"),
    )
    return top_weights(model.model, model.vocab, k)


_FAMILY_LABELS = {"lr": "LR", "svm": "SVM", "bio": "BIO", "keyword": "Keyword",
                  "all1s": "All 1s"}


def render_table(columns: list[ColumnResult],
                 families: tuple[str, ...] = FAMILIES) -> str:
    """Plain-text layout: **bold** marks the best F1 per column, an
    underscore prefix marks significant improvement over all-1s."""
    best: list[float] = []
    for column in columns:
        top = max(round1(column.reports[f].f1) for f in families if f in column.reports)
        ties = [f for f in families
                if f in column.reports and round1(column.reports[f].f1) == top]
        if len(ties) > 1:
            print(f"warning: tied best F1 in column {column.title!r}: {ties}",
                  file=sys.stderr)
        best.append(top)

    out = io.StringIO()
    widths = [max(24, len(c.title) + 2) for c in columns]
    out.write(" " * 10)
    for column, w in zip(columns, widths):
        out.write(column.title.ljust(w))
    out.write("\n")
    out.write(" " * 10)
    for w in widths:
        out.write(("P      R      F1±CI").ljust(w))
    out.write("\n")
    for family in families:
        out.write(_FAMILY_LABELS.get(family, family).ljust(10))
        for column, w, top in zip(columns, widths, best):
            report = column.reports.get(family)
            if report is None:
                out.write("-".ljust(w))
                continue
            p, r, f1, ci = report.rounded()
            f1_cell = f"{f1:.1f}±{ci:.1f}"
            if f1 == top:
                f1_cell = f"**{f1_cell}**"
            if column.significant.get(family):
                f1_cell = "_" + f1_cell
            out.write(f"{p:<6.1f} {r:<6.1f} {f1_cell}".ljust(w))
        out.write("\n")
    return out.getvalue()


def write_table_csv(columns: list[ColumnResult], path,
                    families: tuple[str, ...] = FAMILIES) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["column", "model", "precision", "recall", "f1",
                         "ci_half_width", "n", "best_in_column", "significant_vs_all1s"])
        for column in columns:
            top = max(round1(column.reports[f].f1) for f in families if f in column.reports)
            for family in families:
                report = column.reports.get(family)
                if report is None:
                    continue
                p, r, f1, ci = report.rounded()
                writer.writerow([
                    column.title, _FAMILY_LABELS.get(family, family),
                    f"{p:.1f}", f"{r:.1f}", f"{f1:.1f}", f"{ci:.1f}", report.n,
                    int(f1 == top), int(column.significant.get(family, False)),
                ])


def render_topic_table(rows: list[TopicResult],
                       families: tuple[str, ...] = FAMILIES) -> str:
    out = io.StringIO()
    out.write("Topic".ljust(22) + "Paragraphs".ljust(12))
    for family in families:
        out.write(_FAMILY_LABELS.get(family, family).ljust(16))
    out.write("\n")
    for row in rows:
        out.write(row.topic.ljust(22) + str(row.n).ljust(12))
        top = max(round1(row.reports[f].f1) for f in families if f in row.reports)
        for family in families:
            report = row.reports.get(family)
            _, _, f1, ci = report.rounded()
            cell = f"{f1:.1f}±{ci:.1f}"
            if f1 == top:
                cell = f"**{cell}**"
            if row.significant.get(family):
                cell = "_" + cell
            out.write(cell.ljust(16))
        out.write("\n")
    return out.getvalue()


def write_topic_csv(rows: list[TopicResult], path,
                    families: tuple[str, ...] = FAMILIES) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["topic", "paragraphs", "model", "precision", "recall",
                         "f1", "ci_half_width", "significant_vs_all1s"])
        for row in rows:
            for family in families:
                report = row.reports.get(family)
                if report is None:
                    continue
                p, r, f1, ci = report.rounded()
                writer.writerow([row.topic, row.n, _FAMILY_LABELS.get(family, family),
                                 f"{p:.1f}", f"{r:.1f}", f"{f1:.1f}", f"{ci:.1f}",
                                 int(row.significant.get(family, False))])
