"""HTTP service hosting the annotation workflow.

Serves pairs with their bold masks, accepts alignment saves and deletions,
tracks per-sentence progress, validates completion, and ingests fluency
ratings. All writes go through the append-only event log; reads replay it, so
the served state is always reconstructible from disk.
"""
from __future__ import annotations

import threading
from pathlib import Path
from typing import Any

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import corpus as corpus_mod
from . import textproc
from .corpus import Alignment, DocumentSummaryPair, Span, canonicalize_spans
from .eventlog import EventLog, alignment_event


class AlignmentBody(BaseModel):
    summary_spans: list[tuple[int, int]]
    document_spans: list[tuple[int, int]]
    annotator_id: str = "anonymous"


class VisitBody(BaseModel):
    sentence_index: int


class RatingBody(BaseModel):
    pair_id: str
    system_id: str
    rating: int = Field(ge=1, le=5)
    rater_id: str


def _span_payload(spans: tuple[Span, ...]) -> list[list[int]]:
    return [[s.token_start, s.token_end] for s in spans]


def _document_payload(doc) -> dict[str, Any]:
    return corpus_mod.document_to_record(doc)


class _BoldMaskCache:
    """Relation matrices are quadratic to build; compute once per pair."""

    def __init__(self):
        self._masks: dict[str, list[list[bool]]] = {}
        self._lock = threading.Lock()

    def masks(self, pair: DocumentSummaryPair) -> list[list[bool]]:
        with self._lock:
            if pair.id not in self._masks:
                matrix = textproc.relation_matrix(
                    pair.summary.tokens, pair.document.tokens
                )
                self._masks[pair.id] = [
                    textproc.bold_mask(pair.document, pair.summary, s, matrix)
                    for s in range(pair.summary.sentence_count)
                ]
            return self._masks[pair.id]


def create_app(
    corpus_path: str | Path,
    log_dir: str | Path,
    static_dir: str | Path | None = None,
    single_annotator: bool = False,
) -> FastAPI:
    """Build the annotation service over a corpus file and an event-log root.

    ``single_annotator`` optionally enforces one annotator id per pair; the
    default leaves enforcement to deployment policy.
    """
    pairs = {p.id: p for p in corpus_mod.load(corpus_path)}
    log = EventLog(log_dir)
    bold_cache = _BoldMaskCache()
    app = FastAPI(title="textreduce annotation service")

    def get_pair(pair_id: str) -> DocumentSummaryPair:
        pair = pairs.get(pair_id)
        if pair is None:
            raise HTTPException(status_code=404, detail=f"unknown pair {pair_id}")
        return pair

    def check_spans(
        raw: list[tuple[int, int]], token_count: int, side: str
    ) -> tuple[Span, ...]:
        if not raw:
            raise HTTPException(
                status_code=422, detail=f"{side}_spans must be non-empty"
            )
        spans = []
        for start, end in raw:
            if not 0 <= start < end <= token_count:
                raise HTTPException(
                    status_code=422,
                    detail=(
                        f"{side} span [{start}, {end}) outside token range "
                        f"0..{token_count}"
                    ),
                )
            spans.append((start, end))
        return tuple(spans)

    @app.get("/pairs")
    def list_pairs() -> dict[str, Any]:
        out = []
        for pair in pairs.values():
            state = log.state(pair)
            out.append(
                {"id": pair.id, "status": state.status, "version": state.version}
            )
        return {"pairs": out}

    @app.get("/pairs/{pair_id}")
    def get_pair_payload(pair_id: str) -> dict[str, Any]:
        pair = get_pair(pair_id)
        state = log.state(pair)
        return {
            "id": pair.id,
            "provenance": pair.provenance,
            "document": _document_payload(pair.document),
            "summary": _document_payload(pair.summary),
            "bold_masks": bold_cache.masks(pair),
            "alignments": [
                {
                    "seq": saved.seq,
                    "summary_spans": _span_payload(saved.alignment.summary_spans),
                    "document_spans": _span_payload(saved.alignment.document_spans),
                    "annotator_id": saved.alignment.annotator_id,
                    "deleted": saved.deleted,
                }
                for saved in state.saved
            ],
            "session": {
                "visited": sorted(state.visited),
                "current_summary_sentence": state.current_summary_sentence(
                    pair.summary.sentence_count
                ),
                "status": state.status,
                "annotator_ids": state.annotator_ids,
            },
            "version": state.version,
        }

    @app.post("/pairs/{pair_id}/alignments")
    def save_alignment(pair_id: str, body: AlignmentBody) -> dict[str, Any]:
        pair = get_pair(pair_id)
        summary_raw = check_spans(
            body.summary_spans, len(pair.summary.tokens), "summary"
        )
        document_raw = check_spans(
            body.document_spans, len(pair.document.tokens), "document"
        )
        if single_annotator:
            state = log.state(pair)
            if state.annotator_ids and body.annotator_id not in state.annotator_ids:
                raise HTTPException(
                    status_code=403,
                    detail=(
                        f"pair {pair_id} is assigned to "
                        f"{state.annotator_ids[0]!r} (single-annotator policy)"
                    ),
                )
        alignment = Alignment(
            summary_spans=canonicalize_spans(
                tuple(Span(pair.summary.id, s, e) for s, e in summary_raw)
            ),
            document_spans=canonicalize_spans(
                tuple(Span(pair.document.id, s, e) for s, e in document_raw)
            ),
            annotator_id=body.annotator_id,
        )
        record = log.append(pair_id, alignment_event(alignment))
        state = log.state(pair)
        return {
            "seq": record["seq"],
            "summary_spans": record["summary_spans"],
            "document_spans": record["document_spans"],
            "annotator_id": record["annotator_id"],
            "version": state.version,
        }

    @app.delete("/pairs/{pair_id}/alignments/{seq}")
    def delete_alignment(pair_id: str, seq: int) -> dict[str, Any]:
        pair = get_pair(pair_id)
        state = log.state(pair)
        if not any(s.seq == seq and not s.deleted for s in state.saved):
            raise HTTPException(
                status_code=404, detail=f"no live alignment with seq {seq}"
            )
        log.append(pair_id, {"type": "alignment_deleted", "target_seq": seq})
        return {"deleted": seq, "version": log.state(pair).version}

    @app.post("/pairs/{pair_id}/visit")
    def visit_sentence(pair_id: str, body: VisitBody) -> dict[str, Any]:
        pair = get_pair(pair_id)
        count = pair.summary.sentence_count
        if not 0 <= body.sentence_index < count:
            raise HTTPException(
                status_code=422,
                detail=f"sentence_index {body.sentence_index} outside 0..{count - 1}",
            )
        log.append(
            pair_id,
            {"type": "sentence_visited", "sentence_index": body.sentence_index},
        )
        state = log.state(pair)
        return {
            "visited": sorted(state.visited),
            "current_summary_sentence": state.current_summary_sentence(count),
            "version": state.version,
        }

    @app.post("/pairs/{pair_id}/complete")
    def complete(pair_id: str) -> dict[str, Any]:
        pair = get_pair(pair_id)
        state = log.state(pair)
        unvisited = [
            s for s in range(pair.summary.sentence_count) if s not in state.visited
        ]
        if unvisited:
            raise HTTPException(
                status_code=409,
                detail={
                    "message": "summary sentences not yet visited",
                    "unvisited_sentences": unvisited,
                },
            )
        log.append(pair_id, {"type": "completed"})
        return {"status": "complete", "version": log.state(pair).version}

    @app.post("/ratings")
    def post_rating(body: RatingBody) -> dict[str, Any]:
        get_pair(body.pair_id)
        record = log.append_rating(
            {
                "pair_id": body.pair_id,
                "system_id": body.system_id,
                "rating": body.rating,
                "rater_id": body.rater_id,
            }
        )
        return record

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
