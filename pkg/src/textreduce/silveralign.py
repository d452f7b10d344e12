"""Automatic highlight generation for document-summary pairs.

Summary and document sentences are split into clause-level propositions, every
summary/document proposition pair is scored for lexical coverage, and the
document spans of candidates clearing a probability threshold are merged into
one alignment per summary proposition. A remote neural aligner can be swapped
in through :class:`ExternalAligner`, which speaks a small JSON-over-HTTP
protocol.

The built-in scorer is a coverage ratio (matched content tokens over content
tokens of the summary proposition), not a calibrated probability; the default
0.5 cutoff keeps its intended "more likely aligned than not" reading.
"""
from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import httpx
import numpy as np

from .corpus import (
    Alignment,
    Document,
    DocumentSummaryPair,
    Span,
    canonicalize_spans,
)
from .textproc import RelationMatrix, relation_matrix

DEFAULT_ALIGN_THRESHOLD = 0.5

# Clause boundary vocabularies (matched on lowercased surfaces). A boundary
# token starts a new segment and stays attached to it.
COORDINATORS = frozenset({"and", "but", "or", "nor", "so", "yet"})
SUBORDINATORS = frozenset(
    {
        "while", "when", "whenever", "because", "although", "though", "if",
        "unless", "until", "since", "after", "before", "whereas", "as",
    }
)
RELATIVE_PRONOUNS = frozenset({"who", "whom", "whose", "which", "that", "where"})
SUBJECT_PRONOUNS = frozenset({"i", "you", "he", "she", "it", "we", "they"})

_BOUNDARY_WORDS = COORDINATORS | SUBORDINATORS | RELATIVE_PRONOUNS


class AlignerServiceError(RuntimeError):
    """The external aligner could not be reached within the retry budget."""


class AlignerResponseError(ValueError):
    """The external aligner returned a malformed or out-of-bounds candidate."""


@dataclass(frozen=True)
class PropositionSpan:
    """A clause-level fact: one or more disjoint spans of a single sentence."""

    sentence_index: int
    spans: tuple[Span, ...]
    head_token: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "spans", canonicalize_spans(self.spans))
        if not self.spans:
            raise ValueError("proposition needs at least one span")

    def token_indices(self) -> list[int]:
        return [i for span in self.spans for i in span.indices()]


@dataclass(frozen=True)
class AlignmentCandidate:
    summary_prop: PropositionSpan
    doc_prop: PropositionSpan
    score: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"candidate score {self.score} outside [0, 1]")


@dataclass(frozen=True)
class PairAlignmentResult:
    """Alignments produced for one pair; ``uncovered`` marks pairs where no
    summary proposition cleared the threshold."""

    pair_id: str
    alignments: tuple[Alignment, ...]
    uncovered: bool


# ---------------------------------------------------------------------------
# Proposition extraction
# ---------------------------------------------------------------------------

def extract_propositions(document: Document, sentence_index: int) -> list[PropositionSpan]:
    """Split one sentence into clause-level propositions.

    Segments break before coordinators, subordinators, relative pronouns, and
    commas; segments without content words merge into their neighbor. A
    segment introduced by a relative pronoun, or containing no subject
    pronoun, additionally carries the main clause's subject span, so facts
    like appositions keep their subject. Every content token of the sentence
    lands in at least one proposition.
    """
    start, end = document.sentence_bounds[sentence_index]
    tokens = document.tokens

    boundaries = [
        k
        for k in range(start + 1, end)
        if tokens[k].surface == "," or tokens[k].surface.lower() in _BOUNDARY_WORDS
    ]
    starts = [start] + boundaries
    segments = [(s, e) for s, e in zip(starts, starts[1:] + [end]) if s < e]

    # Merge content-free segments (punctuation runs, bare conjunctions) into
    # their left neighbor; a content-free first segment folds forward instead.
    merged: list[tuple[int, int]] = []
    for seg in segments:
        if merged and not _has_content(tokens, seg):
            merged[-1] = (merged[-1][0], seg[1])
        else:
            merged.append(seg)
    if len(merged) >= 2 and not _has_content(tokens, merged[0]):
        merged[1] = (merged[0][0], merged[1][1])
        merged.pop(0)
    segments = merged or [(start, end)]

    subject = _subject_span(tokens, segments[0])
    props: list[PropositionSpan] = []
    for seg_start, seg_end in segments:
        spans = [Span(document.id, seg_start, seg_end)]
        if (seg_start, seg_end) != segments[0]:
            introducer = tokens[seg_start].surface.lower()
            shares = introducer in RELATIVE_PRONOUNS or not _has_subject_pronoun(
                tokens, (seg_start, seg_end)
            )
            if shares and subject is not None and subject[1] <= seg_start:
                spans.append(Span(document.id, subject[0], subject[1]))
        props.append(
            PropositionSpan(
                sentence_index=sentence_index,
                spans=tuple(spans),
                head_token=_head_token(tokens, (seg_start, seg_end)),
            )
        )
    return props


def document_propositions(document: Document) -> list[PropositionSpan]:
    """Propositions of every sentence, in sentence order."""
    return [
        prop
        for idx in range(document.sentence_count)
        for prop in extract_propositions(document, idx)
    ]


def _has_content(tokens, segment: tuple[int, int]) -> bool:
    return any(tokens[i].is_content for i in range(*segment))


def _has_subject_pronoun(tokens, segment: tuple[int, int]) -> bool:
    return any(tokens[i].surface.lower() in SUBJECT_PRONOUNS for i in range(*segment))


def _head_token(tokens, segment: tuple[int, int]) -> int:
    for i in range(*segment):
        if tokens[i].is_content:
            return i
    return segment[0]


def _subject_span(tokens, segment: tuple[int, int]) -> tuple[int, int] | None:
    """Leading subject of the main clause.

    A subject pronoun stands alone; otherwise the leading non-content run plus
    the content run after it (so "The man", "John Doe"). Returns None for an
    empty segment.
    """
    seg_start, seg_end = segment
    if seg_start >= seg_end:
        return None
    if tokens[seg_start].surface.lower() in SUBJECT_PRONOUNS:
        return (seg_start, seg_start + 1)
    i = seg_start
    while i < seg_end and not tokens[i].is_content:
        i += 1
    j = i
    while j < seg_end and tokens[j].is_content:
        j += 1
    if j == seg_start:
        return (seg_start, seg_start + 1)
    return (seg_start, j)


# ---------------------------------------------------------------------------
# Scoring and thresholding
# ---------------------------------------------------------------------------

def score_alignment(
    pair: DocumentSummaryPair,
    summary_prop: PropositionSpan,
    doc_prop: PropositionSpan,
    matrix: RelationMatrix,
) -> float:
    """Fraction of the summary proposition's content tokens that are related
    to some token of the document proposition.

    A pure set computation: reordering tokens inside either proposition does
    not change the score. Propositions without content tokens score 0.
    """
    summary_idx = [
        i for i in summary_prop.token_indices() if pair.summary.tokens[i].is_content
    ]
    if not summary_idx:
        return 0.0
    doc_idx = doc_prop.token_indices()
    if not doc_idx:
        return 0.0
    sub = matrix.entries[np.ix_(summary_idx, doc_idx)]
    return float(np.count_nonzero(sub.any(axis=1))) / len(summary_idx)


def lexical_candidates(
    pair: DocumentSummaryPair, matrix: RelationMatrix | None = None
) -> list[AlignmentCandidate]:
    """Score every summary proposition against every document proposition."""
    if matrix is None:
        matrix = relation_matrix(pair.summary.tokens, pair.document.tokens)
    summary_props = document_propositions(pair.summary)
    doc_props = document_propositions(pair.document)
    return [
        AlignmentCandidate(sp, dp, score_alignment(pair, sp, dp, matrix))
        for sp in summary_props
        for dp in doc_props
    ]


def merge_candidates(
    candidates: list[AlignmentCandidate],
    threshold: float,
    annotator_id: str,
) -> tuple[Alignment, ...]:
    """One alignment per summary proposition: the union of the document spans
    of all its candidates scoring at or above the threshold."""
    grouped: dict[tuple[Span, ...], list[AlignmentCandidate]] = {}
    for cand in candidates:
        grouped.setdefault(cand.summary_prop.spans, []).append(cand)
    alignments = []
    for summary_spans, group in grouped.items():
        kept = [c for c in group if c.score >= threshold]
        if not kept:
            continue
        doc_spans = canonicalize_spans(
            tuple(span for c in kept for span in c.doc_prop.spans)
        )
        alignments.append(
            Alignment(
                summary_spans=summary_spans,
                document_spans=doc_spans,
                annotator_id=annotator_id,
                score=max(c.score for c in kept),
            )
        )
    return tuple(alignments)


def align_pair(
    pair: DocumentSummaryPair,
    backend: str = "lexical",
    threshold: float = DEFAULT_ALIGN_THRESHOLD,
    client: "ExternalAligner | None" = None,
) -> PairAlignmentResult:
    """Produce silver alignments for one pair.

    ``backend`` is "lexical" (built-in scorer) or "external" (requires a
    configured client). Pairs where nothing clears the threshold come back
    flagged uncovered rather than being dropped.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be within [0, 1], got {threshold}")
    if backend == "lexical":
        candidates = lexical_candidates(pair)
    elif backend == "external":
        if client is None:
            raise ValueError("external backend requires an ExternalAligner client")
        candidates = client.align(pair)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    alignments = merge_candidates(candidates, threshold, annotator_id=backend)
    return PairAlignmentResult(
        pair_id=pair.id, alignments=alignments, uncovered=not alignments
    )


def align_corpus(
    pairs: list[DocumentSummaryPair],
    backend: str = "lexical",
    threshold: float = DEFAULT_ALIGN_THRESHOLD,
    client: "ExternalAligner | None" = None,
    workers: int = 1,
) -> list[PairAlignmentResult]:
    """Align pairs independently, optionally in parallel; results keep the
    input order, so parallelism never changes the output."""
    if workers <= 1:
        return [align_pair(p, backend, threshold, client) for p in pairs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda p: align_pair(p, backend, threshold, client), pairs))


# ---------------------------------------------------------------------------
# External aligner client
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlignerConfig:
    endpoint: str
    timeout: float = 10.0
    retries: int = 2


class ExternalAligner:
    """HTTP client for a remote span-alignment service.

    One POST per pair with body {document_text, summary_text,
    doc_token_offsets, summary_token_offsets}; the response must carry
    {candidates: [{summary_spans, doc_spans, score}]} with token-index span
    pairs. Responses are validated against the pair's token counts. The
    client is safe to share across threads.
    """

    def __init__(self, config: AlignerConfig, transport: httpx.BaseTransport | None = None):
        self.config = config
        self._client = httpx.Client(timeout=config.timeout, transport=transport)

    def close(self) -> None:
        self._client.close()

    def align(self, pair: DocumentSummaryPair) -> list[AlignmentCandidate]:
        payload = {
            "document_text": pair.document.raw_text,
            "summary_text": pair.summary.raw_text,
            "doc_token_offsets": [
                [t.char_start, t.char_end] for t in pair.document.tokens
            ],
            "summary_token_offsets": [
                [t.char_start, t.char_end] for t in pair.summary.tokens
            ],
        }
        response = self._post(payload)
        try:
            body = response.json()
        except (json.JSONDecodeError, ValueError) as exc:
            raise AlignerResponseError(f"response is not JSON: {exc}") from exc
        if not isinstance(body, dict) or not isinstance(body.get("candidates"), list):
            raise AlignerResponseError("response lacks a 'candidates' list")
        return [
            self._parse_candidate(pair, k, raw)
            for k, raw in enumerate(body["candidates"])
        ]

    def _post(self, payload: dict) -> httpx.Response:
        last_error: Exception | None = None
        for _attempt in range(self.config.retries + 1):
            try:
                response = self._client.post(self.config.endpoint, json=payload)
            except httpx.TransportError as exc:
                last_error = exc
                continue
            if response.status_code >= 500:
                last_error = AlignerServiceError(
                    f"server error {response.status_code}"
                )
                continue
            if response.status_code != 200:
                raise AlignerServiceError(
                    f"aligner returned status {response.status_code}"
                )
            return response
        raise AlignerServiceError(
            f"aligner unreachable after {self.config.retries + 1} attempts: {last_error}"
        )

    def _parse_candidate(
        self, pair: DocumentSummaryPair, index: int, raw: object
    ) -> AlignmentCandidate:
        def fail(reason: str) -> AlignerResponseError:
            return AlignerResponseError(f"candidate {index}: {reason}")

        if not isinstance(raw, dict):
            raise fail("not an object")
        try:
            summary_pairs = [(int(s), int(e)) for s, e in raw["summary_spans"]]
            doc_pairs = [(int(s), int(e)) for s, e in raw["doc_spans"]]
            score = float(raw["score"])
        except (KeyError, TypeError, ValueError) as exc:
            raise fail(f"malformed fields: {exc}") from exc
        if not 0.0 <= score <= 1.0:
            raise fail(f"score {score} outside [0, 1]")
        summary_prop = self._prop_from_pairs(pair.summary, summary_pairs, fail)
        doc_prop = self._prop_from_pairs(pair.document, doc_pairs, fail)
        return AlignmentCandidate(summary_prop, doc_prop, score)

    @staticmethod
    def _prop_from_pairs(text: Document, pairs, fail) -> PropositionSpan:
        if not pairs:
            raise fail("empty span list")
        spans = []
        for s, e in pairs:
            if not 0 <= s < e <= len(text.tokens):
                raise fail(
                    f"span [{s}, {e}) outside 0..{len(text.tokens)} of text {text.id}"
                )
            spans.append(Span(text.id, s, e))
        first = min(s.token_start for s in spans)
        return PropositionSpan(
            sentence_index=text.sentence_index_of(first),
            spans=tuple(spans),
            head_token=first,
        )
