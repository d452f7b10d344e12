"""Data model and on-disk format for document-summary pairs with highlight
alignments.

All values are immutable after construction and validated eagerly, so a pair
loaded from disk carries the same guarantees as one built in memory. Spans are
token-indexed (end exclusive) against a frozen tokenization; nothing downstream
ever re-tokenizes stored text.
"""
from __future__ import annotations

import bisect
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable

FORMAT_VERSION = 1

PROVENANCES = ("manual", "silver")


class CorpusFormatError(ValueError):
    """A record file violates the line-record schema."""


class EmptyHighlightsError(ValueError):
    """Highlights were requested for a pair that has no alignments."""


@dataclass(frozen=True)
class Token:
    surface: str
    char_start: int
    char_end: int
    lemma: str
    is_content: bool

    def __post_init__(self) -> None:
        if not 0 <= self.char_start < self.char_end:
            raise ValueError(
                f"bad token char range [{self.char_start}, {self.char_end})"
            )


@dataclass(frozen=True)
class Document:
    """A preprocessed text: frozen tokens plus sentence and paragraph bounds.

    Sentence bounds are token-index ranges partitioning the tokens; paragraph
    bounds are sentence-index ranges partitioning the sentences.
    """

    id: str
    raw_text: str
    tokens: tuple[Token, ...]
    sentence_bounds: tuple[tuple[int, int], ...]
    paragraph_bounds: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        for tok in self.tokens:
            if tok.char_end > len(self.raw_text):
                raise ValueError(f"token {tok.surface!r} exceeds raw text")
            if self.raw_text[tok.char_start : tok.char_end] != tok.surface:
                raise ValueError(
                    f"token {tok.surface!r} does not match raw text at "
                    f"[{tok.char_start}, {tok.char_end})"
                )
        _check_partition(self.sentence_bounds, len(self.tokens), "sentence")
        _check_partition(self.paragraph_bounds, len(self.sentence_bounds), "paragraph")

    @property
    def sentence_count(self) -> int:
        return len(self.sentence_bounds)

    def sentence_index_of(self, token_index: int) -> int:
        """Index of the sentence containing the given token."""
        if not 0 <= token_index < len(self.tokens):
            raise IndexError(f"token index {token_index} out of range")
        starts = [s for s, _ in self.sentence_bounds]
        return bisect.bisect_right(starts, token_index) - 1

    def sentence_tokens(self, sentence_index: int) -> tuple[Token, ...]:
        start, end = self.sentence_bounds[sentence_index]
        return self.tokens[start:end]


def _check_partition(
    bounds: tuple[tuple[int, int], ...], total: int, what: str
) -> None:
    expected = 0
    for start, end in bounds:
        if start != expected or end <= start:
            raise ValueError(f"{what} bounds {bounds} do not partition 0..{total}")
        expected = end
    if expected != total:
        raise ValueError(f"{what} bounds {bounds} do not cover 0..{total}")


@dataclass(frozen=True)
class Span:
    """A contiguous token range (end exclusive) of one text."""

    text_id: str
    token_start: int
    token_end: int

    def __post_init__(self) -> None:
        if not 0 <= self.token_start < self.token_end:
            raise ValueError(
                f"bad span range [{self.token_start}, {self.token_end})"
            )

    def indices(self) -> range:
        return range(self.token_start, self.token_end)


def canonicalize_spans(spans: Iterable[Span]) -> tuple[Span, ...]:
    """Sort spans and merge any that overlap or touch.

    The result is the unique minimal disjoint cover of the spans' token set,
    so canonicalization is idempotent and order-insensitive.
    """
    spans = list(spans)
    ids = {s.text_id for s in spans}
    if len(ids) > 1:
        raise ValueError(f"spans reference multiple texts: {sorted(ids)}")
    merged: list[Span] = []
    for span in sorted(spans, key=lambda s: (s.token_start, s.token_end)):
        if merged and span.token_start <= merged[-1].token_end:
            if span.token_end > merged[-1].token_end:
                merged[-1] = Span(span.text_id, merged[-1].token_start, span.token_end)
        else:
            merged.append(span)
    return tuple(merged)


@dataclass(frozen=True)
class Alignment:
    """One summary fact (span set) mapped to the document span set covering it."""

    summary_spans: tuple[Span, ...]
    document_spans: tuple[Span, ...]
    annotator_id: str
    score: float | None = None

    def __post_init__(self) -> None:
        if not self.summary_spans or not self.document_spans:
            raise ValueError("alignment span lists must be non-empty")
        if self.score is not None and not 0.0 <= self.score <= 1.0:
            raise ValueError(f"alignment score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class DocumentSummaryPair:
    id: str
    document: Document
    summary: Document
    alignments: tuple[Alignment, ...] = ()
    provenance: str = "manual"

    def __post_init__(self) -> None:
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        for alignment in self.alignments:
            _check_spans(alignment.summary_spans, self.summary, "summary")
            _check_spans(alignment.document_spans, self.document, "document")


def _check_spans(spans: tuple[Span, ...], text: Document, side: str) -> None:
    for span in spans:
        if span.text_id != text.id:
            raise ValueError(
                f"{side} span references text {span.text_id!r}, expected {text.id!r}"
            )
        if span.token_end > len(text.tokens):
            raise ValueError(
                f"{side} span [{span.token_start}, {span.token_end}) exceeds "
                f"{len(text.tokens)} tokens"
            )


@dataclass(frozen=True)
class HighlightSet:
    """Canonical (disjoint, sorted) set of highlighted document spans."""

    pair_id: str
    spans: tuple[Span, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "spans", canonicalize_spans(self.spans))

    def token_indices(self) -> frozenset[int]:
        return frozenset(i for span in self.spans for i in span.indices())


def highlights_of(pair: DocumentSummaryPair) -> HighlightSet:
    """Union of every aligned document span, canonicalized.

    Duplicate alignments collapse here; the stored pair keeps them all.
    """
    if not pair.alignments:
        raise EmptyHighlightsError(f"pair {pair.id} has no alignments")
    spans = tuple(s for a in pair.alignments for s in a.document_spans)
    return HighlightSet(pair_id=pair.id, spans=spans)


# ---------------------------------------------------------------------------
# Stable identifiers
# ---------------------------------------------------------------------------

def _digest(*parts: str) -> str:
    h = hashlib.sha256()
    for part in parts:
        h.update(part.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()[:16]


def document_id(raw_text: str) -> str:
    return _digest("doc", raw_text)


def summary_id(raw_text: str) -> str:
    return _digest("summary", raw_text)


def pair_id(document_raw: str, summary_raw: str) -> str:
    return _digest("pair", document_raw, summary_raw)


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------

INGEST_FORMATS = ("pair-lines", "plain-dir")


def ingest(path: str | Path, format: str = "pair-lines", lexicon=None) -> list[DocumentSummaryPair]:
    """Read raw document/summary pairs and preprocess them into corpus pairs.

    ``pair-lines`` is a UTF-8 JSON-lines file whose records carry ``document``
    and ``summary`` string fields. ``plain-dir`` is a directory with
    ``documents/<name>.txt`` and ``summaries/<name>__<label>.txt`` files.
    Ids are content hashes, so re-ingesting the same data yields the same ids.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such input: {path}")
    if format == "pair-lines":
        raw_pairs = _read_pair_lines(path)
    elif format == "plain-dir":
        raw_pairs = _read_plain_dir(path)
    else:
        raise ValueError(f"unknown ingest format {format!r}")

    from . import textproc  # imported here to avoid an import cycle

    doc_cache: dict[tuple[str, str], Document] = {}

    def preprocess(raw: str, text_id: str) -> Document:
        key = (text_id, raw)
        if key not in doc_cache:
            doc_cache[key] = textproc.analyze(raw, text_id=text_id, lexicon=lexicon)
        return doc_cache[key]

    pairs: list[DocumentSummaryPair] = []
    seen: dict[str, str] = {}
    for origin, doc_raw, sum_raw in raw_pairs:
        pid = pair_id(doc_raw, sum_raw)
        if pid in seen:
            raise CorpusFormatError(
                f"{origin}: duplicate pair (same content as {seen[pid]})"
            )
        seen[pid] = origin
        pairs.append(
            DocumentSummaryPair(
                id=pid,
                document=preprocess(doc_raw, document_id(doc_raw)),
                summary=preprocess(sum_raw, summary_id(sum_raw)),
            )
        )
    return pairs


def _read_pair_lines(path: Path) -> list[tuple[str, str, str]]:
    out: list[tuple[str, str, str]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"line {lineno}: invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise CorpusFormatError(f"line {lineno}: record is not an object")
            for key in ("document", "summary"):
                if key not in record:
                    raise CorpusFormatError(f"line {lineno}: missing {key!r} field")
                if not isinstance(record[key], str):
                    raise CorpusFormatError(f"line {lineno}: {key!r} must be a string")
            out.append((f"line {lineno}", record["document"], record["summary"]))
    return out


def _read_plain_dir(path: Path) -> list[tuple[str, str, str]]:
    docs_dir = path / "documents"
    sums_dir = path / "summaries"
    if not docs_dir.is_dir() or not sums_dir.is_dir():
        raise CorpusFormatError(
            f"{path}: plain-dir input needs documents/ and summaries/ subdirectories"
        )
    docs = {p.stem: p for p in sorted(docs_dir.glob("*.txt"))}
    out: list[tuple[str, str, str]] = []
    for sum_path in sorted(sums_dir.glob("*.txt")):
        stem, sep, _label = sum_path.stem.partition("__")
        if not sep:
            stem = sum_path.stem
        if stem not in docs:
            raise CorpusFormatError(
                f"{sum_path.name}: no matching documents/{stem}.txt"
            )
        doc_raw = docs[stem].read_text(encoding="utf-8")
        sum_raw = sum_path.read_text(encoding="utf-8")
        out.append((sum_path.name, doc_raw, sum_raw))
    return out


# ---------------------------------------------------------------------------
# Line-record persistence (format_version 1; field names documented in README)
# ---------------------------------------------------------------------------

def document_to_record(doc: Document) -> dict[str, Any]:
    return {
        "id": doc.id,
        "raw_text": doc.raw_text,
        "tokens": [
            {
                "surface": t.surface,
                "char_start": t.char_start,
                "char_end": t.char_end,
                "lemma": t.lemma,
                "is_content": t.is_content,
            }
            for t in doc.tokens
        ],
        "sentences": [list(b) for b in doc.sentence_bounds],
        "paragraphs": [list(b) for b in doc.paragraph_bounds],
    }


def document_from_record(record: dict[str, Any]) -> Document:
    return Document(
        id=record["id"],
        raw_text=record["raw_text"],
        tokens=tuple(
            Token(
                surface=t["surface"],
                char_start=t["char_start"],
                char_end=t["char_end"],
                lemma=t["lemma"],
                is_content=t["is_content"],
            )
            for t in record["tokens"]
        ),
        sentence_bounds=tuple((s, e) for s, e in record["sentences"]),
        paragraph_bounds=tuple((s, e) for s, e in record["paragraphs"]),
    )


def pair_to_record(pair: DocumentSummaryPair) -> dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "id": pair.id,
        "provenance": pair.provenance,
        "document": document_to_record(pair.document),
        "summary": document_to_record(pair.summary),
        "alignments": [
            {
                "summary_spans": [[s.token_start, s.token_end] for s in a.summary_spans],
                "document_spans": [[s.token_start, s.token_end] for s in a.document_spans],
                "annotator_id": a.annotator_id,
                "score": a.score,
            }
            for a in pair.alignments
        ],
    }


def pair_from_record(record: dict[str, Any]) -> DocumentSummaryPair:
    version = record.get("format_version")
    if version != FORMAT_VERSION:
        raise CorpusFormatError(f"unsupported format_version {version!r}")
    document = document_from_record(record["document"])
    summary = document_from_record(record["summary"])
    alignments = tuple(
        Alignment(
            summary_spans=tuple(
                Span(summary.id, s, e) for s, e in a["summary_spans"]
            ),
            document_spans=tuple(
                Span(document.id, s, e) for s, e in a["document_spans"]
            ),
            annotator_id=a["annotator_id"],
            score=a.get("score"),
        )
        for a in record["alignments"]
    )
    return DocumentSummaryPair(
        id=record["id"],
        document=document,
        summary=summary,
        alignments=alignments,
        provenance=record["provenance"],
    )


def save(pairs: Iterable[DocumentSummaryPair], path: str | Path) -> None:
    """Write pairs as UTF-8 JSON lines; ``load`` restores them field-for-field."""
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for pair in pairs:
                fh.write(json.dumps(pair_to_record(pair), ensure_ascii=False))
                fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write corpus to {path}: {exc}") from exc


def load(path: str | Path) -> list[DocumentSummaryPair]:
    path = Path(path)
    pairs: list[DocumentSummaryPair] = []
    seen: set[str] = set()
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read corpus from {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                pair = pair_from_record(record)
            except CorpusFormatError as exc:
                raise CorpusFormatError(f"{path} line {lineno}: {exc}") from exc
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CorpusFormatError(
                    f"{path} line {lineno}: malformed record: {exc}"
                ) from exc
            if pair.id in seen:
                raise CorpusFormatError(f"{path} line {lineno}: duplicate pair id {pair.id}")
            seen.add(pair.id)
            pairs.append(pair)
    return pairs
