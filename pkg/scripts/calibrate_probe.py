#!/usr/bin/env python3
"""Quick difficulty probe for collection calibration (development tool).

Regenerates nothing; reads data/manifest.jsonl and reports fixed-hyper
cross-validation scores for the vector models plus a one-fold tagger
sweep, which tracks where the fully tuned pipeline will land.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from foia_review import corpus as C
from foia_review import crf
from foia_review.evaluation import confusion, prf
from foia_review.experiments import stratified_folds
from foia_review.features import FeatureConfig, build_vocabulary, vectorize_all
from foia_review.linear_model import LRHyper, train_lr
from foia_review.pipeline import BIOPipeline, dataset_sequences
from foia_review.svm_model import SVMHyper, train_svm


def main() -> None:
    corpus = C.load_collection(Path(__file__).resolve().parent.parent / "data/manifest.jsonl")
    data = C.select(corpus, {"K1", "K2", "K3", "K5"}, "A", C.SCOPE_D0_T0)
    labels = np.asarray(data.labels)
    folds = stratified_folds(labels, 5, seed=7)

    pooled = {f"lr@{th}": np.zeros(len(data), dtype=int) for th in (0.3, 0.4, 0.5)}
    pooled["svm"] = np.zeros(len(data), dtype=int)
    pooled["svm_idf"] = np.zeros(len(data), dtype=int)
    for test_idx in folds:
        train_idx = np.setdiff1d(np.arange(len(data)), test_idx)
        tr, te = data.subset(train_idx), data.subset(test_idx)
        vocab = build_vocabulary(tr.texts, FeatureConfig())
        X, Xt = vectorize_all(tr.texts, vocab), vectorize_all(te.texts, vocab)
        scores = train_lr(X, tr.labels, LRHyper(C=1.0)).scores(Xt)
        for th in (0.3, 0.4, 0.5):
            pooled[f"lr@{th}"][test_idx] = (scores >= th).astype(int)
        pooled["svm"][test_idx] = train_svm(X, tr.labels,
                                            SVMHyper(C=1.0, kernel="linear")).predict(Xt)
        cfg = FeatureConfig(use_idf=True)
        vocab2 = build_vocabulary(tr.texts, cfg)
        X2, Xt2 = vectorize_all(tr.texts, vocab2), vectorize_all(te.texts, vocab2)
        pooled["svm_idf"][test_idx] = train_svm(X2, tr.labels,
                                                SVMHyper(C=10.0, kernel="linear")).predict(Xt2)
    for key, preds in pooled.items():
        p, r, f1 = prf(confusion(preds, labels))
        print(f"{key:8s} P={p:5.1f} R={r:5.1f} F1={f1:5.1f}")

    train_idx = np.setdiff1d(np.arange(len(data)), folds[0])
    tr, te = data.subset(train_idx), data.subset(folds[0])
    seqs = dataset_sequences(tr)
    gold = np.asarray(te.labels)
    for c1, c2 in [(0.1, 0.1), (1.0, 1.0)]:
        model = crf.train_crf(seqs, c1=c1, c2=c2)
        cells = []
        for overlap in (10, 30, 50):
            pred = BIOPipeline("bio", model, overlap).predict(te)
            p, r, f1 = prf(confusion(pred.labels, gold))
            cells.append(f"ov{overlap} {p:.0f}/{r:.0f}/{f1:.1f}")
        print(f"bio c1={c1} c2={c2}: " + "  ".join(cells))


if __name__ == "__main__":
    main()
