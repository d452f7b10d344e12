"""Model-input encodings for highlighted documents, and their inverses.

Two encodings are produced: the full document with reserved start/end marker
tokens wrapping each highlighted span (markers double as global-attention
positions), and a bare concatenation of the highlighted spans with a dot
separating spans drawn from different document sentences. Marker encodings are
invertible as long as no span was dropped by the length cap.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import (
    DocumentSummaryPair,
    EmptyHighlightsError,
    HighlightSet,
    Span,
    canonicalize_spans,
    highlights_of,
)

HIGHLIGHT_START = "<highlight_start>"
HIGHLIGHT_END = "<highlight_end>"
DEFAULT_MAX_LEN = 4096

_MARKERS = (HIGHLIGHT_START, HIGHLIGHT_END)
_ESCAPED_MARKER_RE = re.compile(
    r"\\+(?:" + "|".join(re.escape(m) for m in _MARKERS) + r")$"
)


class MarkerBalanceError(ValueError):
    """A marked sequence violates strict start/end alternation."""


@dataclass(frozen=True)
class MarkedSequence:
    """A document token sequence with highlight markers inserted.

    ``global_mask`` is True exactly on marker tokens; ``source_map`` carries
    the source token index for every non-marker position (None on markers).
    Spans that could not fit whole under the length cap are reported in
    ``dropped_spans`` and carry no markers.
    """

    pair_id: str
    tokens: tuple[str, ...]
    global_mask: tuple[bool, ...]
    source_map: tuple[int | None, ...]
    dropped_spans: tuple[Span, ...] = ()


def _escape(surface: str) -> str:
    if surface in _MARKERS or _ESCAPED_MARKER_RE.fullmatch(surface):
        return "\\" + surface
    return surface


def _unescape(token: str) -> str:
    if _ESCAPED_MARKER_RE.fullmatch(token):
        return token[1:]
    return token


def _validated_spans(
    pair: DocumentSummaryPair, highlights: HighlightSet | Sequence[Span]
) -> tuple[Span, ...]:
    if isinstance(highlights, HighlightSet):
        if highlights.pair_id != pair.id:
            raise ValueError(
                f"highlight set belongs to pair {highlights.pair_id}, not {pair.id}"
            )
        spans = highlights.spans
    else:
        spans = tuple(highlights)
        if canonicalize_spans(spans) != spans:
            raise ValueError(
                "highlight spans must be canonical (sorted, disjoint, merged)"
            )
    for span in spans:
        if span.text_id != pair.document.id:
            raise ValueError(
                f"span references text {span.text_id}, not document {pair.document.id}"
            )
        if span.token_end > len(pair.document.tokens):
            raise ValueError(
                f"span [{span.token_start}, {span.token_end}) exceeds document "
                f"of {len(pair.document.tokens)} tokens"
            )
    return spans


def encode_with_markers(
    pair: DocumentSummaryPair,
    highlights: HighlightSet | Sequence[Span],
    max_len: int = DEFAULT_MAX_LEN,
) -> MarkedSequence:
    """Insert start/end markers around each highlighted span.

    The output is capped at ``max_len`` tokens (markers included). A span
    whose end marker would land beyond the cap is dropped whole, never split,
    and reported in ``dropped_spans``. Literal marker strings occurring in the
    document are escaped so markers stay unambiguous.
    """
    if max_len < 1:
        raise ValueError(f"max_len must be positive, got {max_len}")
    spans = _validated_spans(pair, highlights)
    doc_tokens = pair.document.tokens

    fitting: list[Span] = []
    dropped: list[Span] = []
    markers = 0
    for span in spans:
        # End marker lands at output index span.token_end + markers + 1; both
        # markers must survive the cap or the span is dropped whole.
        if span.token_end + markers + 1 < max_len:
            fitting.append(span)
            markers += 2
        else:
            dropped.append(span)

    starts = {s.token_start for s in fitting}
    ends = {s.token_end for s in fitting}
    out_tokens: list[str] = []
    global_mask: list[bool] = []
    source_map: list[int | None] = []

    def emit(token: str, is_marker: bool, source: int | None) -> None:
        out_tokens.append(token)
        global_mask.append(is_marker)
        source_map.append(source)

    for j, tok in enumerate(doc_tokens):
        if j in ends:
            emit(HIGHLIGHT_END, True, None)
        if j in starts:
            emit(HIGHLIGHT_START, True, None)
        emit(_escape(tok.surface), False, j)
    if len(doc_tokens) in ends:
        emit(HIGHLIGHT_END, True, None)

    return MarkedSequence(
        pair_id=pair.id,
        tokens=tuple(out_tokens[:max_len]),
        global_mask=tuple(global_mask[:max_len]),
        source_map=tuple(source_map[:max_len]),
        dropped_spans=tuple(dropped),
    )


def strip_markers(
    marked: MarkedSequence | Sequence[str],
) -> tuple[tuple[str, ...], tuple[tuple[int, int], ...]]:
    """Invert a marker encoding into (source tokens, span ranges).

    Raises :class:`MarkerBalanceError` naming the first offending position
    when markers do not strictly alternate or a span is left open or empty.
    """
    tokens = marked.tokens if isinstance(marked, MarkedSequence) else tuple(marked)
    out: list[str] = []
    spans: list[tuple[int, int]] = []
    open_at: int | None = None
    open_start: int | None = None
    for pos, token in enumerate(tokens):
        if token == HIGHLIGHT_START:
            if open_start is not None:
                raise MarkerBalanceError(f"nested start marker at position {pos}")
            open_start = len(out)
            open_at = pos
        elif token == HIGHLIGHT_END:
            if open_start is None:
                raise MarkerBalanceError(f"end marker without start at position {pos}")
            if len(out) == open_start:
                raise MarkerBalanceError(f"empty highlighted span at position {pos}")
            spans.append((open_start, len(out)))
            open_start = None
            open_at = None
        else:
            out.append(_unescape(token))
    if open_start is not None:
        raise MarkerBalanceError(f"unclosed start marker at position {open_at}")
    return tuple(out), tuple(spans)


def recover_highlights(
    pair: DocumentSummaryPair, marked: MarkedSequence | Sequence[str]
) -> tuple[tuple[str, ...], HighlightSet]:
    """Strip markers and rebuild the highlight set against the pair's document."""
    tokens, ranges = strip_markers(marked)
    spans = tuple(Span(pair.document.id, s, e) for s, e in ranges)
    return tokens, HighlightSet(pair_id=pair.id, spans=spans)


def is_marker_balanced(tokens: Sequence[str]) -> bool:
    """True when start/end markers strictly alternate and all are closed."""
    open_span = False
    for token in tokens:
        if token == HIGHLIGHT_START:
            if open_span:
                return False
            open_span = True
        elif token == HIGHLIGHT_END:
            if not open_span:
                return False
            open_span = False
    return not open_span


def encode_concat_only(
    pair: DocumentSummaryPair, highlights: HighlightSet | Sequence[Span]
) -> list[str]:
    """Concatenate highlighted spans in document order.

    A "." token separates consecutive spans drawn from different document
    sentences; spans from the same sentence follow each other directly (a
    plain space once joined). Empty highlight sets are an error.
    """
    spans = _validated_spans(pair, highlights)
    if not spans:
        raise EmptyHighlightsError(f"pair {pair.id}: nothing to concatenate")
    doc = pair.document
    out: list[str] = []
    previous_sentence: int | None = None
    for span in spans:
        first_sentence = doc.sentence_index_of(span.token_start)
        if previous_sentence is not None and first_sentence != previous_sentence:
            out.append(".")
        out.extend(t.surface for t in doc.tokens[span.token_start : span.token_end])
        previous_sentence = doc.sentence_index_of(span.token_end - 1)
    return out


# ---------------------------------------------------------------------------
# Training-record export
# ---------------------------------------------------------------------------

def export_records(
    pairs: Iterable[DocumentSummaryPair],
    path: str | Path,
    mode: str = "markers",
    max_len: int = DEFAULT_MAX_LEN,
) -> dict[str, int]:
    """Write one JSON line per pair with the model-input contract.

    Marker mode records carry {pair_id, input_tokens, global_mask,
    target_text, dropped_spans}; concat mode records carry {pair_id,
    input_tokens, target_text}. Pairs without alignments are skipped and
    counted. Returns {written, skipped, dropped_spans}.
    """
    if mode not in ("markers", "concat"):
        raise ValueError(f"unknown encode mode {mode!r}")
    written = skipped = dropped = 0
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            if not pair.alignments:
                skipped += 1
                continue
            highlights = highlights_of(pair)
            if mode == "markers":
                seq = encode_with_markers(pair, highlights, max_len=max_len)
                dropped += len(seq.dropped_spans)
                record = {
                    "pair_id": pair.id,
                    "input_tokens": list(seq.tokens),
                    "global_mask": list(seq.global_mask),
                    "target_text": pair.summary.raw_text,
                    "dropped_spans": len(seq.dropped_spans),
                }
            else:
                record = {
                    "pair_id": pair.id,
                    "input_tokens": encode_concat_only(pair, highlights),
                    "target_text": pair.summary.raw_text,
                }
            fh.write(json.dumps(record, ensure_ascii=False))
            fh.write("\n")
            written += 1
    return {"written": written, "skipped": skipped, "dropped_spans": dropped}
