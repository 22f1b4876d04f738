"""Tokenization, vocabulary construction and sparse vectorization.

Tokens are maximal runs of ASCII letters or digits, lowercased.  The
vocabulary is built from training paragraphs only and frozen; vectors are
raw term counts, or smoothed tf-idf with L2 normalization when idf
weighting is on.
"""

from __future__ import annotations

import csv
import hashlib
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse

from . import porter
from .errors import EmptyVocabularyError

_TOKEN = re.compile(r"[a-z0-9]+")

STEMMERS = ("none", "porter")


@dataclass(frozen=True)
class FeatureConfig:
    """Text-side knobs shared by the vector classifiers."""

    stemmer: str = "none"
    use_idf: bool = False

    def __post_init__(self):
        if self.stemmer not in STEMMERS:
            raise ValueError(f"unknown stemmer: {self.stemmer!r}")


def tokenize(text: str, config: FeatureConfig = FeatureConfig()) -> list[str]:
    """Lowercased alphanumeric runs in order, optionally Porter-stemmed."""
    tokens = _TOKEN.findall(text.lower())
    if config.stemmer == "porter":
        tokens = [porter.stem(t) for t in tokens]
    return tokens


class Vocabulary:
    """Frozen term→index map with paragraph-level document frequencies."""

    def __init__(self, index: dict[str, int], document_frequency: dict[str, int],
                 n_train_docs: int, config: FeatureConfig):
        self.index = index
        self.document_frequency = document_frequency
        self.n_train_docs = n_train_docs
        self.config = config
        self._idf = np.ones(len(index))
        if config.use_idf:
            for term, i in index.items():
                df = document_frequency[term]
                self._idf[i] = math.log((1 + n_train_docs) / (1 + df)) + 1.0

    def __len__(self) -> int:
        return len(self.index)

    def terms(self) -> list[str]:
        out = [""] * len(self.index)
        for term, i in self.index.items():
            out[i] = term
        return out

    def content_hash(self) -> str:
        """Stable digest of (terms, df, size) for leakage checks."""
        h = hashlib.sha256()
        for term in sorted(self.index):
            h.update(f"{term}\t{self.index[term]}\t{self.document_frequency[term]}\n".encode())
        h.update(f"{self.n_train_docs}\t{self.config.use_idf}\t{self.config.stemmer}".encode())
        return h.hexdigest()

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
            writer.writerow(["#n_train_docs", self.n_train_docs])
            writer.writerow(["#use_idf", int(self.config.use_idf)])
            writer.writerow(["#stemmer", self.config.stemmer])
            for term in self.terms():
                writer.writerow([term, self.index[term], self.document_frequency[term]])

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        header: dict[str, str] = {}
        index: dict[str, int] = {}
        df: dict[str, int] = {}
        with open(path, encoding="utf-8", newline="") as fh:
            for row in csv.reader(fh, delimiter="\t"):
                if row[0].startswith("#"):
                    header[row[0][1:]] = row[1]
                    continue
                term, idx, count = row
                index[term] = int(idx)
                df[term] = int(count)
        config = FeatureConfig(stemmer=header["stemmer"], use_idf=bool(int(header["use_idf"])))
        return cls(index, df, int(header["n_train_docs"]), config)


def build_vocabulary(train_texts: list[str], config: FeatureConfig) -> Vocabulary:
    """One entry per distinct token; indices assigned lexicographically."""
    df: dict[str, int] = {}
    for text in train_texts:
        for term in set(tokenize(text, config)):
            df[term] = df.get(term, 0) + 1
    if not df:
        raise EmptyVocabularyError("no tokens in any training paragraph")
    index = {term: i for i, term in enumerate(sorted(df))}
    return Vocabulary(index, df, len(train_texts), config)


@dataclass
class FeatureVector:
    """Sparse index→weight map for one paragraph."""

    weights: dict[int, float] = field(default_factory=dict)

    @property
    def l2_norm(self) -> float:
        return math.sqrt(sum(w * w for w in self.weights.values()))


def vectorize(text: str, vocab: Vocabulary) -> FeatureVector:
    """Vectorize one paragraph; out-of-vocabulary tokens are dropped."""
    counts: dict[int, float] = {}
    for token in tokenize(text, vocab.config):
        idx = vocab.index.get(token)
        if idx is not None:
            counts[idx] = counts.get(idx, 0.0) + 1.0
    if not vocab.config.use_idf:
        return FeatureVector(counts)
    weighted = {i: c * vocab._idf[i] for i, c in counts.items()}
    norm = math.sqrt(sum(w * w for w in weighted.values()))
    if norm > 0:
        weighted = {i: w / norm for i, w in weighted.items()}
    return FeatureVector(weighted)


def vectorize_all(texts: list[str], vocab: Vocabulary) -> sparse.csr_matrix:
    """Vectorize many paragraphs into one CSR matrix (rows align with texts)."""
    data: list[float] = []
    indices: list[int] = []
    indptr = [0]
    for text in texts:
        vec = vectorize(text, vocab)
        for idx in sorted(vec.weights):
            indices.append(idx)
            data.append(vec.weights[idx])
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.asarray(data), np.asarray(indices, dtype=np.int32), np.asarray(indptr, dtype=np.int32)),
        shape=(len(texts), len(vocab)),
    )
