"""HTTP service for machine-assisted review.

Reviewer decisions are an append-only journal (one JSON record per line);
the current-decision view is the journal's last word per (paragraph,
reviewer).  Retraining produces a new immutable model version and swaps
it in atomically; queue order and highlight scores are deterministic
functions of (model version, corpus).  Payload field names are documented
in docs/api.md.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import Depends, FastAPI, HTTPException, Request
from pydantic import BaseModel, ConfigDict

from .corpus import Corpus, DataSet, Example, LabelScope, LABELS, SCOPE_D0_T0, binarize
from .errors import DegenerateTrainingError, StratificationError
from .pipeline import TRAINED_FAMILIES, PredictionResult
from .tuning import ParamGrid, default_grid, tune_and_train


@dataclass(frozen=True)
class Decision:
    paragraph_id: str
    label: str
    reviewer: str
    timestamp: str
    model_version: int | None

    def record(self) -> dict:
        return {
            "paragraph_id": self.paragraph_id,
            "label": self.label,
            "reviewer": self.reviewer,
            "timestamp": self.timestamp,
            "model_version": self.model_version,
        }


class Journal:
    """Append-only decision log with a replayable current view."""

    def __init__(self, path: Path):
        self.path = path
        self.entries: list[Decision] = []
        self.current: dict[tuple[str, str], Decision] = {}
        if path.exists():
            with open(path, encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        self._apply(Decision(**json.loads(line)))

    def _apply(self, decision: Decision) -> None:
        self.entries.append(decision)
        self.current[(decision.paragraph_id, decision.reviewer)] = decision

    def append(self, decision: Decision) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(decision.record()) + "\n")
        self._apply(decision)

    def history(self, paragraph_id: str) -> list[Decision]:
        return [d for d in self.entries if d.paragraph_id == paragraph_id]

    def replayed_view(self) -> dict[tuple[str, str], Decision]:
        view: dict[tuple[str, str], Decision] = {}
        for decision in self.entries:
            view[(decision.paragraph_id, decision.reviewer)] = decision
        return view


@dataclass
class ModelVersion:
    version: int
    family: str
    scope_name: str
    params: dict
    decision_set_hash: str
    created: str
    pipeline: object
    scores: dict[str, float] = field(default_factory=dict)
    predicted: dict[str, int] = field(default_factory=dict)


class ReviewState:
    def __init__(self, corpus: Corpus, state_dir: Path, seed: int = 7):
        self.corpus = corpus
        self.seed = seed
        self.journal = Journal(state_dir / "journal.jsonl")
        self.versions: list[ModelVersion] = []
        self.active: ModelVersion | None = None
        self.write_lock = threading.Lock()

    # -- decisions ---------------------------------------------------------
    def submit(self, paragraph_id: str, label: str, reviewer: str) -> Decision:
        try:
            self.corpus.paragraph(paragraph_id)
        except KeyError:
            raise HTTPException(404, f"unknown paragraph {paragraph_id!r}")
        if label not in LABELS:
            raise HTTPException(422, f"unknown label {label!r}; expected one of {LABELS}")
        if not reviewer:
            raise HTTPException(422, "reviewer must be non-empty")
        decision = Decision(
            paragraph_id=paragraph_id,
            label=label,
            reviewer=reviewer,
            timestamp=time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            model_version=self.active.version if self.active else None,
        )
        with self.write_lock:
            self.journal.append(decision)
        return decision

    # -- training ----------------------------------------------------------
    def _training_data(self, scope: LabelScope) -> DataSet:
        examples = []
        for (paragraph_id, _reviewer), decision in sorted(self.journal.current.items()):
            binary = binarize(decision.label, scope)
            if binary is None:
                continue
            paragraph = self.corpus.paragraph(paragraph_id)
            doc_id = paragraph_id.rsplit("/", 1)[0]
            examples.append(
                Example(
                    paragraph_id=paragraph_id,
                    document_id=doc_id,
                    ordinal=paragraph.ordinal,
                    text=paragraph.text,
                    label=binary,
                )
            )
        return DataSet(examples, reviewer="journal", scope=scope)

    def retrain(self, family: str, scope: LabelScope,
                grid: ParamGrid | None = None) -> ModelVersion:
        if family not in TRAINED_FAMILIES:
            raise HTTPException(422, f"family must be one of {TRAINED_FAMILIES}")
        data = self._training_data(scope)
        if data.positives == 0 or data.positives == len(data):
            raise HTTPException(
                409, "journal needs at least one decision in each class under "
                     f"scope {scope.name} (have {data.positives} of {len(data)})"
            )
        import hashlib

        digest = hashlib.sha256()
        for ex in data.examples:
            digest.update(f"{ex.paragraph_id}\t{ex.label}\n".encode())
        try:
            try:
                pipeline, result = tune_and_train(
                    family, data, seed=self.seed, grid=grid or default_grid(family)
                )
                params = result.best_params
            except StratificationError:
                # journal too small for a held-out split: fit directly
                params = next(iter((grid or default_grid(family)).points()))
                from .pipeline import fit_pipeline

                pipeline = fit_pipeline(family, params, data)
        except DegenerateTrainingError as exc:
            raise HTTPException(409, str(exc))
        version = ModelVersion(
            version=(self.versions[-1].version + 1) if self.versions else 1,
            family=family,
            scope_name=scope.name,
            params=params,
            decision_set_hash=digest.hexdigest(),
            created=time.strftime("%Y-%m-%dT%H:%M:%S%z"),
            pipeline=pipeline,
        )
        self._score_corpus(version)
        with self.write_lock:
            self.versions.append(version)
            self.active = version  # atomic swap; prior versions stay readable
        return version

    def _score_corpus(self, version: ModelVersion) -> None:
        examples = []
        for doc in self.corpus.documents:
            for p in doc.paragraphs:
                examples.append(Example(p.id, doc.id, p.ordinal, p.text, 0))
        data = DataSet(examples, reviewer="all", scope=SCOPE_D0_T0)
        prediction: PredictionResult = version.pipeline.predict(data)
        for ex, label, score in zip(examples, prediction.labels, prediction.scores):
            version.scores[ex.paragraph_id] = float(score)
            version.predicted[ex.paragraph_id] = int(label)

    # -- queries -----------------------------------------------------------
    def require_model(self) -> ModelVersion:
        if self.active is None:
            raise HTTPException(409, "no model trained yet; POST /api/v1/retrain first")
        return self.active

    def queue(self) -> dict:
        version = self.require_model()
        rows = []
        for doc in self.corpus.documents:
            predicted = [version.predicted[p.id] for p in doc.paragraphs]
            rows.append({
                "document_id": doc.id,
                "predicted_exempt_fraction": sum(predicted) / len(predicted),
                "paragraphs": len(predicted),
            })
        rows.sort(key=lambda r: (r["predicted_exempt_fraction"], r["document_id"]))
        return {"model_version": version.version, "queue": rows}

    def document_predictions(self, document_id: str) -> dict:
        version = self.require_model()
        try:
            doc = self.corpus.document(document_id)
        except KeyError:
            raise HTTPException(404, f"unknown document {document_id!r}")
        paragraphs = []
        for p in doc.paragraphs:
            decisions = [
                d.record() for (pid, _), d in self.journal.current.items() if pid == p.id
            ]
            paragraphs.append({
                "paragraph_id": p.id,
                "ordinal": p.ordinal,
                "text": p.text,
                "score": version.scores[p.id],
                "predicted": version.predicted[p.id],
                "decisions": sorted(decisions, key=lambda d: d["reviewer"]),
            })
        return {
            "model_version": version.version,
            "document_id": doc.id,
            "paragraphs": paragraphs,
        }

    def inconsistencies(self, threshold: float) -> dict:
        if not 0.5 < threshold < 1.0:
            raise HTTPException(422, "threshold must lie strictly between 0.5 and 1.0")
        version = self.require_model()
        scope = LabelScope.from_name(version.scope_name)
        rows = []
        for (paragraph_id, reviewer), decision in self.journal.current.items():
            binary = binarize(decision.label, scope)
            if binary is None:
                continue
            score = version.scores.get(paragraph_id)
            if score is None:
                continue
            opposite_confidence = score if binary == 0 else 1.0 - score
            if opposite_confidence > threshold:
                rows.append({
                    "paragraph_id": paragraph_id,
                    "reviewer": reviewer,
                    "label": decision.label,
                    "model_score": score,
                    "opposite_confidence": opposite_confidence,
                })
        rows.sort(key=lambda r: (-r["opposite_confidence"], r["paragraph_id"]))
        return {"model_version": version.version, "inconsistencies": rows}


class DecisionIn(BaseModel):
    paragraph_id: str
    label: str
    reviewer: str


class RetrainIn(BaseModel):
    model_config = ConfigDict(protected_namespaces=())

    model_family: str = "lr"
    scope: str = "d0t0"
    fast: bool = False


FAST_GRIDS = {
    "lr": ParamGrid("lr", (("use_idf", (False,)), ("stemmer", ("none",)),
                           ("C", (1.0,)), ("threshold", (0.3, 0.5)))),
    "svm": ParamGrid("svm", (("use_idf", (False,)), ("stemmer", ("none",)),
                             ("C", (1.0,)), ("kernel", ("linear",)))),
    "bio": ParamGrid("bio", (("c1", (0.1,)), ("c2", (0.1,)), ("overlap", (10, 50)))),
}


def create_app(corpus: Corpus, state_dir: Path, token: str | None = None,
               seed: int = 7) -> FastAPI:
    state = ReviewState(corpus, Path(state_dir), seed=seed)
    app = FastAPI(title="foia-review service", version="1")
    app.state.review = state

    def check_token(request: Request) -> None:
        if token is not None and request.headers.get("X-Review-Token") != token:
            raise HTTPException(401, "missing or invalid X-Review-Token")

    guarded = Depends(check_token)

    @app.get("/api/v1/health")
    def health() -> dict:
        return {
            "status": "ok",
            "documents": len(corpus.documents),
            "model_version": state.active.version if state.active else None,
        }

    @app.get("/api/v1/queue")
    def queue(_: None = guarded) -> dict:
        return state.queue()

    @app.get("/api/v1/documents/{document_id:path}/predictions")
    def predictions(document_id: str, _: None = guarded) -> dict:
        return state.document_predictions(document_id)

    @app.post("/api/v1/decisions", status_code=201)
    def decisions(body: DecisionIn, _: None = guarded) -> dict:
        decision = state.submit(body.paragraph_id, body.label, body.reviewer)
        history = state.journal.history(body.paragraph_id)
        return {"decision": decision.record(), "history_length": len(history)}

    @app.post("/api/v1/retrain", status_code=201)
    def retrain(body: RetrainIn, _: None = guarded) -> dict:
        try:
            scope = LabelScope.from_name(body.scope)
        except ValueError as exc:
            raise HTTPException(422, str(exc))
        grid = FAST_GRIDS[body.model_family] if body.fast and body.model_family in FAST_GRIDS else None
        version = state.retrain(body.model_family, scope, grid=grid)
        return {
            "model_version": version.version,
            "family": version.family,
            "scope": version.scope_name,
            "params": version.params,
            "decision_set_hash": version.decision_set_hash,
            "created": version.created,
        }

    @app.get("/api/v1/inconsistencies")
    def inconsistencies(threshold: float = 0.9, _: None = guarded) -> dict:
        return state.inconsistencies(threshold)

    return app
