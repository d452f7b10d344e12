"""Append-only event logs for annotation sessions.

One JSON-lines file per pair under the log root. Saves, deletes, visits, and
completion are events; state is a pure replay of the file, so any prefix of
the log is a valid historical state and nothing is ever rewritten in place.
Writes to one pair's log are serialized through a per-pair lock.
"""
from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from .corpus import Alignment, DocumentSummaryPair, Span, canonicalize_spans

EVENT_TYPES = ("alignment_saved", "alignment_deleted", "sentence_visited", "completed")


@dataclass
class SavedAlignment:
    seq: int
    alignment: Alignment
    deleted: bool = False


@dataclass
class PairAnnotationState:
    """Session state reconstructed by replaying a pair's event log."""

    saved: list[SavedAlignment] = field(default_factory=list)
    visited: set[int] = field(default_factory=set)
    completed: bool = False
    version: int = 0
    annotator_ids: list[str] = field(default_factory=list)

    @property
    def live(self) -> list[SavedAlignment]:
        return [s for s in self.saved if not s.deleted]

    def current_summary_sentence(self, sentence_count: int) -> int:
        """Lowest unvisited sentence index, or the count when all are done."""
        for s in range(sentence_count):
            if s not in self.visited:
                return s
        return sentence_count

    @property
    def status(self) -> str:
        return "complete" if self.completed else "in_progress"


class EventLog:
    """Per-pair append-only JSON-lines logs plus a shared ratings log."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def _lock_for(self, name: str) -> threading.Lock:
        with self._registry_lock:
            if name not in self._locks:
                self._locks[name] = threading.Lock()
            return self._locks[name]

    def _path(self, pair_id: str) -> Path:
        return self.root / f"{pair_id}.events.jsonl"

    def append(self, pair_id: str, event: dict[str, Any]) -> dict[str, Any]:
        """Append one event, assigning the next sequence number."""
        if event.get("type") not in EVENT_TYPES:
            raise ValueError(f"unknown event type {event.get('type')!r}")
        with self._lock_for(pair_id):
            events = self._read(self._path(pair_id))
            record = {
                "seq": len(events),
                "at": datetime.now(timezone.utc).isoformat(),
                **event,
            }
            with open(self._path(pair_id), "a", encoding="utf-8") as fh:
                # single write keeps the O_APPEND append atomic for readers
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        return record

    def events(self, pair_id: str) -> list[dict[str, Any]]:
        return self._read(self._path(pair_id))

    @staticmethod
    def _read(path: Path) -> list[dict[str, Any]]:
        if not path.exists():
            return []
        with open(path, encoding="utf-8") as fh:
            return [json.loads(line) for line in fh if line.strip()]

    def state(self, pair: DocumentSummaryPair) -> PairAnnotationState:
        """Replay the pair's log into its current session state."""
        return replay(self.events(pair.id), pair)

    # -- ratings ------------------------------------------------------------

    def append_rating(self, rating: dict[str, Any]) -> dict[str, Any]:
        path = self.root / "ratings.jsonl"
        with self._lock_for("__ratings__"):
            record = {"at": datetime.now(timezone.utc).isoformat(), **rating}
            with open(path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        return record

    def ratings(self) -> list[dict[str, Any]]:
        return self._read(self.root / "ratings.jsonl")


def alignment_event(alignment: Alignment) -> dict[str, Any]:
    """Event payload for a saved alignment, spans in canonical form."""
    return {
        "type": "alignment_saved",
        "summary_spans": [
            [s.token_start, s.token_end]
            for s in canonicalize_spans(alignment.summary_spans)
        ],
        "document_spans": [
            [s.token_start, s.token_end]
            for s in canonicalize_spans(alignment.document_spans)
        ],
        "annotator_id": alignment.annotator_id,
    }


def replay(events: list[dict[str, Any]], pair: DocumentSummaryPair) -> PairAnnotationState:
    """Fold an event list into session state.

    Saves append; deletes tombstone their target but keep it in history;
    visits accumulate (alignment saves implicitly visit the summary sentences
    they touch); completion is terminal.
    """
    state = PairAnnotationState()
    for event in events:
        etype = event["type"]
        if etype == "alignment_saved":
            alignment = Alignment(
                summary_spans=tuple(
                    Span(pair.summary.id, s, e) for s, e in event["summary_spans"]
                ),
                document_spans=tuple(
                    Span(pair.document.id, s, e) for s, e in event["document_spans"]
                ),
                annotator_id=event["annotator_id"],
            )
            state.saved.append(SavedAlignment(seq=event["seq"], alignment=alignment))
            if event["annotator_id"] not in state.annotator_ids:
                state.annotator_ids.append(event["annotator_id"])
            for span in alignment.summary_spans:
                for i in span.indices():
                    state.visited.add(pair.summary.sentence_index_of(i))
        elif etype == "alignment_deleted":
            for saved in state.saved:
                if saved.seq == event["target_seq"]:
                    saved.deleted = True
        elif etype == "sentence_visited":
            state.visited.add(event["sentence_index"])
        elif etype == "completed":
            state.completed = True
        state.version = event["seq"] + 1
    return state
