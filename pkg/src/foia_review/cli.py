"""Command-line entry point: ingestion, training, tables, service startup.

Machine-readable results go to files under --out (or stdout); progress and
warnings go to stderr.  Every run records a manifest (command, arguments,
seed, corpus digest, outputs) in the output directory, and all randomness
flows from --seed.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .corpus import (
    BATCHES,
    Corpus,
    LabelScope,
    SCOPE_D0_T0,
    load_collection,
    select,
)
from .errors import ReviewError
from .evaluation import cohens_kappa, round1
from .experiments import (
    SideSpec,
    ExperimentConfig,
    leave_one_topic_out,
    render_table,
    render_topic_table,
    run_condition,
    run_table,
    table_configs,
    top_words_table,
    write_table_csv,
    write_topic_csv,
)
from .pipeline import FAMILIES, TRAINED_FAMILIES, fit_pipeline, load_pipeline, save_pipeline
from .tuning import default_grid, tune_and_train

ENV_DATA_DIR = "FOIA_REVIEW_DATA"


def corpus_hash(corpus: Corpus) -> str:
    h = hashlib.sha256()
    for doc in corpus.documents:
        h.update(doc.id.encode())
        for p in doc.paragraphs:
            h.update(p.text.encode())
            for reviewer in sorted(p.labels):
                h.update(f"{reviewer}={p.labels[reviewer]}".encode())
    return h.hexdigest()


def _default_manifest() -> str:
    root = os.environ.get(ENV_DATA_DIR, "data")
    return str(Path(root) / "manifest.jsonl")


def _parse_side(text: str) -> SideSpec:
    reviewer, _, batch_part = text.partition(":")
    batches = frozenset(b.strip() for b in batch_part.split(",") if b.strip())
    if not reviewer or not batches:
        raise argparse.ArgumentTypeError(
            f"expected REVIEWER:BATCH[,BATCH...], got {text!r}"
        )
    unknown = batches - set(BATCHES)
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown batches: {sorted(unknown)}")
    return SideSpec(reviewer, batches)


def _write_run_manifest(out_dir: Path, args: argparse.Namespace, corpus: Corpus | None,
                        outputs: list[str]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    record = {
        "command": args.command,
        "arguments": {k: v for k, v in sorted(vars(args).items())
                      if k != "func" and not callable(v)},
        "seed": getattr(args, "seed", None),
        "corpus_hash": corpus_hash(corpus) if corpus is not None else None,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "version": __version__,
        "outputs": outputs,
    }
    (out_dir / "run_manifest.json").write_text(json.dumps(record, indent=2) + "\n")


def cmd_ingest(args) -> int:
    corpus = load_collection(args.manifest)
    print(f"{len(corpus.documents)} documents, "
          f"{sum(corpus.paragraph_counts.values())} paragraphs, "
          f"reviewers {sorted(corpus.reviewers)}")
    for batch in BATCHES:
        if batch in corpus.paragraph_counts:
            print(f"  {batch}: {corpus.paragraph_counts[batch]} paragraphs")
    print(f"corpus hash: {corpus_hash(corpus)}")
    return 0


def cmd_tune(args) -> int:
    corpus = load_collection(args.manifest)
    data = select(corpus, set(args.train.batches), args.train.reviewer, args.scope)
    model, result = tune_and_train(args.model, data, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    log_path = out / f"grid_{args.model}.tsv"
    result.write_log(log_path)
    print(f"best params: {result.best_params}", file=sys.stderr)
    print(f"best validation F1: {result.best_validation_f1:.2f}", file=sys.stderr)
    outputs = [str(log_path)]
    model_path = out / f"model_{args.model}.json"
    save_pipeline(model, model_path)
    outputs.append(str(model_path))
    if hasattr(model, "vocab"):
        vocab_path = out / f"vocab_{args.model}.tsv"
        model.vocab.save(vocab_path)
        outputs.append(str(vocab_path))
    _write_run_manifest(out, args, corpus, outputs)
    print(json.dumps({"best_params": result.best_params,
                      "best_validation_f1": result.best_validation_f1}))
    return 0


def cmd_train(args) -> int:
    corpus = load_collection(args.manifest)
    data = select(corpus, set(args.train.batches), args.train.reviewer, args.scope)
    params = json.loads(args.params) if args.params else default_params(args.model)
    model = fit_pipeline(args.model, params, data)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model_path = out / f"model_{args.model}.json"
    save_pipeline(model, model_path)
    outputs = [str(model_path)]
    if hasattr(model, "vocab"):
        vocab_path = out / f"vocab_{args.model}.tsv"
        model.vocab.save(vocab_path)
        outputs.append(str(vocab_path))
    _write_run_manifest(out, args, corpus, outputs)
    print(f"wrote {model_path}")
    return 0


def default_params(family: str) -> dict:
    if family == "lr":
        return {"use_idf": False, "stemmer": "none", "C": 1.0, "threshold": 0.5}
    if family == "svm":
        return {"use_idf": False, "stemmer": "none", "C": 1.0, "kernel": "linear"}
    if family == "bio":
        return {"c1": 0.1, "c2": 0.1, "overlap": 10}
    return {}


def cmd_predict(args) -> int:
    corpus = load_collection(args.manifest)
    data = select(corpus, set(args.test.batches), args.test.reviewer, args.scope)
    vocab = None
    if args.vocab_file:
        from .features import Vocabulary

        vocab = Vocabulary.load(args.vocab_file)
    model = load_pipeline(args.model_file, vocab)
    prediction = model.predict(data)
    writer = csv.writer(sys.stdout if args.out == "-" else open(args.out, "w", newline=""),
                        delimiter="\t", lineterminator="\n")
    writer.writerow(["paragraph_id", "prediction", "score"])
    for ex, label, score in zip(data.examples, prediction.labels, prediction.scores):
        writer.writerow([ex.paragraph_id, int(label), f"{score:.6f}"])
    return 0


def cmd_eval(args) -> int:
    corpus = load_collection(args.manifest)
    condition = "A" if args.train == args.test else args.condition
    config = ExperimentConfig(condition, args.train, args.test, args.scope,
                              folds=args.folds, seed=args.seed)
    families = tuple(args.model.split(",")) if args.model else FAMILIES
    column = run_condition(corpus, config, families=families, jobs=args.jobs)
    print(render_table([column], families=families))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / "eval.csv"
        write_table_csv([column], csv_path, families=families)
        _write_run_manifest(out, args, corpus, [str(csv_path)])
    return 0


def cmd_table(args) -> int:
    corpus = load_collection(args.manifest)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    families = tuple(args.model.split(",")) if args.model else FAMILIES
    outputs = []
    if args.id in (5, 6, 7, 8, 9, 10):
        columns = run_table(corpus, args.id, seed=args.seed, families=families,
                            jobs=args.jobs)
        text = render_table(columns, families=families)
        csv_path = out / f"table{args.id}.csv"
        write_table_csv(columns, csv_path, families=families)
        outputs.append(str(csv_path))
    elif args.id == 11:
        rows = leave_one_topic_out(corpus, families=families, seed=args.seed,
                                   jobs=args.jobs)
        text = render_topic_table(rows, families=families)
        csv_path = out / "table11.csv"
        write_topic_csv(rows, csv_path, families=families)
        outputs.append(str(csv_path))
    elif args.id == 12:
        positive, negative = top_words_table(corpus, seed=args.seed)
        lines = ["positive\tnegative"]
        lines += [f"{p}\t{n}" for p, n in zip(positive, negative)]
        text = "\n".join(lines) + "\n"
        csv_path = out / "table12.tsv"
        csv_path.write_text(text)
        outputs.append(str(csv_path))
    else:  # unreachable behind argparse choices
        raise ReviewError(f"unknown table id {args.id}")
    text_path = out / f"table{args.id}.txt"
    text_path.write_text(text)
    outputs.append(str(text_path))
    _write_run_manifest(out, args, corpus, outputs)
    print(text)
    return 0


def cmd_agreement(args) -> int:
    corpus = load_collection(args.manifest)
    rev_a, rev_b = args.reviewers.split(",")
    a_bin, b_bin = [], []
    cells = {(0, 0): 0, (0, 1): 0, (1, 0): 0, (1, 1): 0}
    for _, paragraph in corpus.iter_paragraphs({args.batch}):
        if rev_a not in paragraph.labels or rev_b not in paragraph.labels:
            continue
        a = int(paragraph.labels[rev_a] == "D1")
        b = int(paragraph.labels[rev_b] == "D1")
        a_bin.append(a)
        b_bin.append(b)
        cells[(a, b)] += 1
    if not a_bin:
        raise ReviewError(
            f"no paragraphs of batch {args.batch} carry both reviewers "
            f"{rev_a!r} and {rev_b!r}"
        )
    kappa = cohens_kappa(a_bin, b_bin)
    print(f"batch {args.batch}, reviewers {rev_a} vs {rev_b} "
          f"(zero codes collapsed): n={len(a_bin)}")
    print(f"  both-zero={cells[(0, 0)]}  {rev_a}-zero/{rev_b}-one={cells[(0, 1)]}  "
          f"{rev_a}-one/{rev_b}-zero={cells[(1, 0)]}  both-one={cells[(1, 1)]}")
    print(f"  kappa={kappa:.4f} (reported {round(kappa, 2):.2f})")
    return 0


def cmd_top_words(args) -> int:
    corpus = load_collection(args.manifest)
    positive, negative = top_words_table(corpus, seed=args.seed, k=args.k)
    print("positive\tnegative")
    for p, n in zip(positive, negative):
        print(f"{p}\t{n}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    corpus = load_collection(args.manifest)
    app = create_app(corpus, state_dir=Path(args.state_dir), token=args.token,
                     seed=args.seed)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="foia-review",
        description="Paragraph-level sensitivity review pipeline",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, train=False, test=False, out=False):
        p.add_argument("--manifest", default=_default_manifest(),
                       help=f"collection manifest (default from ${ENV_DATA_DIR})")
        p.add_argument("--seed", type=int, default=7)
        p.add_argument("--scope", type=LabelScope.from_name, default=SCOPE_D0_T0,
                       metavar="{d0,d0t0,d0t0e0}")
        p.add_argument("--jobs", type=int, default=1)
        if train:
            p.add_argument("--train", type=_parse_side, required=True,
                           metavar="REVIEWER:BATCHES")
        if test:
            p.add_argument("--test", type=_parse_side, required=True,
                           metavar="REVIEWER:BATCHES")
        if out:
            p.add_argument("--out", default="results")

    p = sub.add_parser("ingest", help="load the collection and print batch counts")
    common(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("tune", help="grid-search one model family")
    common(p, train=True, out=True)
    p.add_argument("--model", choices=TRAINED_FAMILIES, required=True)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("train", help="fit one model with explicit parameters")
    common(p, train=True, out=True)
    p.add_argument("--model", choices=TRAINED_FAMILIES, required=True)
    p.add_argument("--params", help="JSON hyper-parameters (defaults otherwise)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score a selection with a saved model")
    common(p, test=True)
    p.add_argument("--model-file", required=True)
    p.add_argument("--vocab-file")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="evaluate models on a train/test design")
    common(p, train=True, test=True, out=False)
    p.add_argument("--model", help="comma-separated families (default all)")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--condition", default="B", choices=("A", "B", "C", "D"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("table", help="reproduce a published result table")
    common(p, out=True)
    p.add_argument("--id", type=int, required=True, choices=range(5, 13))
    p.add_argument("--model", help="comma-separated families (default all)")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("agreement", help="two-reviewer agreement on a batch")
    common(p)
    p.add_argument("--batch", default="K2")
    p.add_argument("--reviewers", default="A,B")
    p.set_defaults(func=cmd_agreement)

    p = sub.add_parser("topics", help="leave-one-topic-out evaluation")
    common(p, out=True)
    p.add_argument("--model", help="comma-separated families (default all)")
    p.set_defaults(func=lambda args: cmd_table(_as_table(args, 11)))

    p = sub.add_parser("top-words", help="strongest terms of the tuned classifier")
    common(p)
    p.add_argument("--k", type=int, default=20)
    p.set_defaults(func=cmd_top_words)

    p = sub.add_parser("serve", help="start the review service")
    common(p)
    p.add_argument("--state-dir", default="review_state")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8100)
    p.add_argument("--token", help="static token required in X-Review-Token")
    p.set_defaults(func=cmd_serve)
    return parser


def _as_table(args, table_id: int):
    args.id = table_id
    args.command = "table"
    return args


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ReviewError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
