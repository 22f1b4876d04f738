"""Uniform train/predict wrappers for the five model families.

A fitted pipeline owns everything needed to score paragraphs: the text
configuration, the frozen vocabulary (for vector models) or the tag model
(for the word-level tagger).  Scores are in [0, 1] for every family so
the review service can display them uniformly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

from . import bio, crf
from .baselines import all_ones_predict_many, keyword_predict_many
from .corpus import DataSet, Example
from .errors import InvalidHyperParameterError
from .features import FeatureConfig, Vocabulary, build_vocabulary, tokenize, vectorize_all
from .linear_model import LRHyper, LRModel, train_lr
from .svm_model import SVMHyper, SVMModel, train_svm

FAMILIES = ("lr", "svm", "bio", "keyword", "all1s")
TRAINED_FAMILIES = ("lr", "svm", "bio")

_RAW = FeatureConfig()


@dataclass
class PredictionResult:
    labels: np.ndarray
    scores: np.ndarray


def parse_kernel(value: str) -> tuple[str, float | None]:
    """Grid axis encoding: 'linear' or 'rbf:<gamma>'."""
    kernel, _, gamma = value.partition(":")
    if kernel == "linear":
        return "linear", None
    if kernel == "rbf" and gamma:
        return "rbf", float(gamma)
    raise InvalidHyperParameterError(f"bad kernel spec: {value!r}")


@dataclass
class VectorPipeline:
    family: str
    config: FeatureConfig
    vocab: Vocabulary
    model: LRModel | SVMModel

    def predict(self, dataset: DataSet, context: DataSet | None = None) -> PredictionResult:
        X = vectorize_all(dataset.texts, self.vocab)
        if self.family == "lr":
            scores = self.model.scores(X)
            labels = (scores >= self.model.hyper.threshold).astype(int)
        else:
            decision = self.model.decision(X)
            labels = (decision >= 0.0).astype(int)
            scores = expit(decision)
        return PredictionResult(labels=labels, scores=scores)


@dataclass
class BIOPipeline:
    family: str
    model: crf.CRFModel
    overlap_percent: int

    def predict(self, dataset: DataSet, context: DataSet | None = None) -> PredictionResult:
        """Tag word sequences and map spans back to paragraphs.

        The sequence unit is the document: when `context` holds other
        paragraphs of the same documents (the training portion of a
        cross-validation fold), they are decoded together so word context
        does not break at fold boundaries.  Only `dataset` paragraphs are
        reported.
        """
        wanted = {ex.paragraph_id for ex in dataset.examples}
        merged = dataset
        if context is not None:
            extras = [ex for ex in context.examples if ex.paragraph_id not in wanted]
            merged = DataSet(list(dataset.examples) + extras, dataset.reviewer,
                             dataset.scope)
        by_id: dict[str, tuple[int, float]] = {}
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
            tags = crf.viterbi_decode(self.model, flat)
            labels = bio.bio_to_paragraph(tags, spans, self.overlap_percent)
            fractions = bio.span_fractions(tags, spans)
            for ex, label, frac in zip(run, labels, fractions):
                by_id[ex.paragraph_id] = (label, frac)
        labels = np.array([by_id[ex.paragraph_id][0] for ex in dataset.examples], dtype=int)
        scores = np.array([by_id[ex.paragraph_id][1] for ex in dataset.examples])
        return PredictionResult(labels=labels, scores=scores)


@dataclass
class BaselinePipeline:
    family: str

    def predict(self, dataset: DataSet, context: DataSet | None = None) -> PredictionResult:
        if self.family == "keyword":
            labels = keyword_predict_many(dataset.texts)
        else:
            labels = all_ones_predict_many(dataset.texts)
        return PredictionResult(labels=labels, scores=labels.astype(float))


def document_runs(dataset: DataSet) -> list[list[Example]]:
    """Maximal runs of ordinal-consecutive examples within each document.

    Runs are the sequence unit for the tagger: scope filtering and fold
    assignment can punch holes in a document, and context features must
    not cross those holes.
    """
    runs: list[list[Example]] = []
    for _, examples in dataset.by_document().items():
        current = [examples[0]]
        for ex in examples[1:]:
            if ex.ordinal == current[-1].ordinal + 1:
                current.append(ex)
            else:
                runs.append(current)
                current = [ex]
        runs.append(current)
    return runs


def dataset_sequences(dataset: DataSet) -> list[tuple[list[str], list[str]]]:
    """(tokens, gold tags) training sequences, one per document run."""
    sequences = []
    for run in document_runs(dataset):
        tokens_per_para = [tokenize(ex.text, _RAW) for ex in run]
        seq = bio.paragraphs_to_bio(tokens_per_para, [ex.label for ex in run])
        sequences.append((seq.tokens, seq.tags))
    return sequences


def fit_pipeline(family: str, params: dict, dataset: DataSet):
    """Train one pipeline with explicit hyper-parameters."""
    if family == "lr":
        config = FeatureConfig(stemmer=params["stemmer"], use_idf=params["use_idf"])
        vocab = build_vocabulary(dataset.texts, config)
        X = vectorize_all(dataset.texts, vocab)
        model = train_lr(X, dataset.labels, LRHyper(C=params["C"], threshold=params["threshold"]))
        return VectorPipeline("lr", config, vocab, model)
    if family == "svm":
        config = FeatureConfig(stemmer=params["stemmer"], use_idf=params["use_idf"])
        vocab = build_vocabulary(dataset.texts, config)
        X = vectorize_all(dataset.texts, vocab)
        kernel, gamma = parse_kernel(params["kernel"])
        model = train_svm(X, dataset.labels, SVMHyper(C=params["C"], kernel=kernel, gamma=gamma))
        return VectorPipeline("svm", config, vocab, model)
    if family == "bio":
        model = crf.train_crf(dataset_sequences(dataset), c1=params["c1"], c2=params["c2"])
        return BIOPipeline("bio", model, overlap_percent=int(params["overlap"]))
    if family in ("keyword", "all1s"):
        return BaselinePipeline(family)
    raise ValueError(f"unknown model family: {family!r}")


FORMAT_VERSION = 1


def save_pipeline(pipeline, path: str | Path) -> None:
    """Versioned JSON dump of a fitted pipeline's parameters."""
    doc: dict = {"format_version": FORMAT_VERSION, "family": pipeline.family}
    if isinstance(pipeline, VectorPipeline):
        doc["feature_config"] = {
            "stemmer": pipeline.config.stemmer,
            "use_idf": pipeline.config.use_idf,
        }
        doc["vocabulary_hash"] = pipeline.vocab.content_hash()
        if pipeline.family == "lr":
            doc["hyper"] = {"C": pipeline.model.hyper.C,
                            "threshold": pipeline.model.hyper.threshold}
            doc["weights"] = pipeline.model.weights.tolist()
            doc["bias"] = pipeline.model.bias
        else:
            doc["hyper"] = {"C": pipeline.model.hyper.C,
                            "kernel": pipeline.model.hyper.kernel,
                            "gamma": pipeline.model.hyper.gamma}
            sv = pipeline.model.support_vectors
            sv = sv.toarray() if hasattr(sv, "toarray") else np.asarray(sv)
            doc["support_vectors"] = sv.tolist()
            doc["dual_coef"] = pipeline.model.dual_coef.tolist()
            doc["intercept"] = pipeline.model.intercept
    elif isinstance(pipeline, BIOPipeline):
        doc["hyper"] = {"c1": pipeline.model.c1, "c2": pipeline.model.c2,
                        "overlap": pipeline.overlap_percent}
        doc["state_features"] = pipeline.model.state_feature_triples()
        doc["transitions"] = pipeline.model.transition_weights.tolist()
        doc["feature_names"] = sorted(pipeline.model.feature_index)
    else:
        pass  # baselines carry no parameters
    Path(path).write_text(json.dumps(doc) + "\n", encoding="utf-8")


def load_pipeline(path: str | Path, vocab: Vocabulary | None = None):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc["format_version"] != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {doc['format_version']}")
    family = doc["family"]
    if family in ("keyword", "all1s"):
        return BaselinePipeline(family)
    if family in ("lr", "svm"):
        if vocab is None:
            raise ValueError("vector models need their vocabulary to load")
        if vocab.content_hash() != doc["vocabulary_hash"]:
            raise ValueError("vocabulary hash does not match the saved model")
        config = FeatureConfig(**doc["feature_config"])
        if family == "lr":
            model = LRModel(np.asarray(doc["weights"]), doc["bias"],
                            LRHyper(C=doc["hyper"]["C"], threshold=doc["hyper"]["threshold"]))
        else:
            model = SVMModel(
                hyper=SVMHyper(C=doc["hyper"]["C"], kernel=doc["hyper"]["kernel"],
                               gamma=doc["hyper"]["gamma"]),
                support_vectors=np.asarray(doc["support_vectors"]),
                dual_coef=np.asarray(doc["dual_coef"]),
                intercept=doc["intercept"],
            )
        return VectorPipeline(family, config, vocab, model)
    if family == "bio":
        feature_index = {name: i for i, name in enumerate(doc["feature_names"])}
        state = np.zeros((len(feature_index), crf.N_TAGS))
        for name, tag, weight in doc["state_features"]:
            state[feature_index[name], crf.TAG_INDEX[tag]] = weight
        model = crf.CRFModel(
            feature_index=feature_index,
            state_weights=state,
            transition_weights=np.asarray(doc["transitions"]),
            c1=doc["hyper"]["c1"],
            c2=doc["hyper"]["c2"],
        )
        return BIOPipeline("bio", model, overlap_percent=int(doc["hyper"]["overlap"]))
    raise ValueError(f"unknown model family: {family!r}")
