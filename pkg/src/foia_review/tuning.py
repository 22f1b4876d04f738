"""Validation split and exhaustive grid search.

Grids enumerate their Cartesian product in row-major, declaration order;
ties on validation F1 go to the earliest point.  Expensive sub-models are
shared across points that differ only in cheap axes (the LR probability
threshold, the tagger's overlap threshold).
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bio as bio_mod
from . import crf
from .corpus import DataSet
from .errors import DegenerateTrainingError, EmptyVocabularyError, StratificationError
from .evaluation import confusion, prf
from .features import FeatureConfig, build_vocabulary, tokenize, vectorize_all
from .linear_model import LRHyper, train_lr
from .pipeline import dataset_sequences, document_runs, fit_pipeline, parse_kernel
from .svm_model import SVMHyper, train_svm

_RAW = FeatureConfig()


@dataclass(frozen=True)
class ParamGrid:
    model_family: str
    axes: tuple[tuple[str, tuple], ...]

    def points(self):
        names = [name for name, _ in self.axes]
        for combo in itertools.product(*(values for _, values in self.axes)):
            yield dict(zip(names, combo))

    def size(self) -> int:
        n = 1
        for _, values in self.axes:
            n *= len(values)
        return n


def default_grid(family: str) -> ParamGrid:
    if family == "lr":
        return ParamGrid("lr", (
            ("use_idf", (False, True)),
            ("stemmer", ("none", "porter")),
            ("C", (0.01, 0.1, 1.0, 5.0, 10.0)),
            ("threshold", (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)),
        ))
    if family == "svm":
        return ParamGrid("svm", (
            ("use_idf", (False, True)),
            ("stemmer", ("none", "porter")),
            ("C", (0.01, 0.1, 1.0, 5.0, 10.0)),
            ("kernel", ("linear", "rbf:1", "rbf:0.1", "rbf:0.01", "rbf:0.001", "rbf:0.0001")),
        ))
    if family == "bio":
        return ParamGrid("bio", (
            ("c1", (0.01, 0.1, 1.0, 5.0, 10.0)),
            ("c2", (0.01, 0.1, 1.0, 5.0, 10.0)),
            ("overlap", tuple(range(10, 101, 10))),
        ))
    raise ValueError(f"no tuning grid for family {family!r}")


@dataclass
class TuningResult:
    best_params: dict
    best_validation_f1: float
    grid_log: list[tuple[dict, float]] = field(default_factory=list)

    def write_log(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
            names = list(self.grid_log[0][0]) if self.grid_log else []
            writer.writerow(names + ["validation_f1"])
            for params, f1 in self.grid_log:
                writer.writerow([params[n] for n in names] + [f"{f1:.6f}"])


def split_train_validation(dataset: DataSet, fraction: float = 0.2,
                           seed: int = 0) -> tuple[DataSet, DataSet]:
    """Stratified random split; deterministic for a fixed seed."""
    if not 0.0 < fraction < 1.0:
        raise StratificationError(f"validation fraction must be in (0,1), got {fraction}")
    labels = np.asarray(dataset.labels)
    rng = np.random.default_rng(seed)
    val_idx: list[int] = []
    train_idx: list[int] = []
    for cls in (0, 1):
        members = np.flatnonzero(labels == cls)
        if len(members) < 2:
            raise StratificationError(f"class {cls} has {len(members)} examples; need at least 2")
        members = members[rng.permutation(len(members))]
        n_val = int(round(fraction * len(members)))
        n_val = min(max(n_val, 1), len(members) - 1)
        val_idx.extend(members[:n_val])
        train_idx.extend(members[n_val:])
    return dataset.subset(sorted(train_idx)), dataset.subset(sorted(val_idx))


def grid_search(model_family: str, grid: ParamGrid, train: DataSet,
                validation: DataSet) -> TuningResult:
    """Train per grid point, score F1 on validation, keep the earliest max.

    A point that fails to train (degenerate data) is logged with F1 = 0.
    """
    if grid.size() == 0:
        raise ValueError("empty grid")
    if len(validation) == 0:
        raise StratificationError("validation set is empty")
    runner = _runner_for(model_family, train, validation)
    log: list[tuple[dict, float]] = []
    best_params: dict | None = None
    best_f1 = -1.0
    for params in grid.points():
        try:
            labels = runner.validation_labels(params)
            f1 = prf(confusion(labels, validation.labels))[2]
        except (DegenerateTrainingError, EmptyVocabularyError):
            f1 = 0.0
        log.append((params, f1))
        if f1 > best_f1:
            best_f1 = f1
            best_params = params
    assert best_params is not None
    return TuningResult(best_params=best_params, best_validation_f1=best_f1, grid_log=log)


def tune_and_train(model_family: str, dataset: DataSet, seed: int,
                   fraction: float = 0.2, retrain_on_full: bool = True,
                   grid: ParamGrid | None = None):
    """Split, search the grid, then train the final model.

    Returns (fitted pipeline, TuningResult).  With retrain_on_full the
    winning parameters are refit on train+validation, otherwise on the
    training part only.
    """
    if grid is None:
        grid = default_grid(model_family)
    train, validation = split_train_validation(dataset, fraction=fraction, seed=seed)
    result = grid_search(model_family, grid, train, validation)
    final_data = dataset if retrain_on_full else train
    model = fit_pipeline(model_family, result.best_params, final_data)
    return model, result


class _LRRunner:
    """Shares one trained model across the ten threshold points."""

    def __init__(self, train: DataSet, validation: DataSet):
        self.train = train
        self.validation = validation
        self._scores: dict[tuple, np.ndarray] = {}

    def validation_labels(self, params: dict) -> np.ndarray:
        key = (params["use_idf"], params["stemmer"], params["C"])
        if key not in self._scores:
            config = FeatureConfig(stemmer=params["stemmer"], use_idf=params["use_idf"])
            vocab = build_vocabulary(self.train.texts, config)
            X = vectorize_all(self.train.texts, vocab)
            model = train_lr(X, self.train.labels, LRHyper(C=params["C"]))
            X_val = vectorize_all(self.validation.texts, vocab)
            self._scores[key] = model.scores(X_val)
        return (self._scores[key] >= params["threshold"]).astype(int)


class _SVMRunner:
    def __init__(self, train: DataSet, validation: DataSet):
        self.train = train
        self.validation = validation
        self._matrices: dict[FeatureConfig, tuple] = {}

    def _vectorized(self, config: FeatureConfig):
        if config not in self._matrices:
            vocab = build_vocabulary(self.train.texts, config)
            self._matrices[config] = (
                vectorize_all(self.train.texts, vocab),
                vectorize_all(self.validation.texts, vocab),
            )
        return self._matrices[config]

    def validation_labels(self, params: dict) -> np.ndarray:
        config = FeatureConfig(stemmer=params["stemmer"], use_idf=params["use_idf"])
        X, X_val = self._vectorized(config)
        kernel, gamma = parse_kernel(params["kernel"])
        model = train_svm(X, self.train.labels, SVMHyper(C=params["C"], kernel=kernel, gamma=gamma))
        return (model.decision(X_val) >= 0.0).astype(int)


class _BIORunner:
    """Shares one trained tagger across the ten overlap points.

    Validation paragraphs are decoded inside their documents, with the
    training-side paragraphs as context, mirroring how fold evaluation
    treats documents split across the partition.
    """

    def __init__(self, train: DataSet, validation: DataSet):
        self.validation = validation
        self._train_sequences = dataset_sequences(train)
        self._fractions: dict[tuple, np.ndarray] = {}
        wanted = {ex.paragraph_id for ex in validation.examples}
        merged = DataSet(list(validation.examples) + list(train.examples),
                         validation.reviewer, validation.scope)
        self._val_runs = []
        for run in document_runs(merged):
            if not any(ex.paragraph_id in wanted for ex in run):
                continue
            tokens_per_para = [tokenize(ex.text, _RAW) for ex in run]
            flat = [t for toks in tokens_per_para for t in toks]
            spans = []
            start = 0
            for toks in tokens_per_para:
                spans.append((start, start + len(toks)))
                start += len(toks)
            self._val_runs.append((run, flat, spans))

    def validation_labels(self, params: dict) -> np.ndarray:
        key = (params["c1"], params["c2"])
        if key not in self._fractions:
            model = crf.train_crf(self._train_sequences, c1=params["c1"], c2=params["c2"])
            by_id: dict[str, float] = {}
            for run, flat, spans in self._val_runs:
                tags = crf.viterbi_decode(model, flat)
                for ex, frac in zip(run, bio_mod.span_fractions(tags, spans)):
                    by_id[ex.paragraph_id] = frac
            self._fractions[key] = np.array(
                [by_id[ex.paragraph_id] for ex in self.validation.examples]
            )
        return (100.0 * self._fractions[key] >= params["overlap"]).astype(int)


def _runner_for(family: str, train: DataSet, validation: DataSet):
    if family == "lr":
        return _LRRunner(train, validation)
    if family == "svm":
        return _SVMRunner(train, validation)
    if family == "bio":
        return _BIORunner(train, validation)
    raise ValueError(f"no tuner for family {family!r}")
