"""Metrics over highlight data: token-wise IoU agreement, highlight
precision/recall/F1, ROUGE-1/2/L content preservation, and corpus statistics.

All metrics are token-index arithmetic over the frozen tokenization, restricted
to content words where stated. Scores are percentages in [0, 100]; report
formatting rounds to two decimals. Degenerate denominators yield 0 together
with a diagnostic entry rather than dropping the instance.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import modelio, textproc
from .corpus import (
    Alignment,
    DocumentSummaryPair,
    EmptyHighlightsError,
    HighlightSet,
)

# ---------------------------------------------------------------------------
# Token-wise IoU agreement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SentenceIou:
    sentence_index: int
    iou: float


@dataclass(frozen=True)
class IouReport:
    per_sentence: tuple[SentenceIou, ...]
    mean_iou: float


@dataclass(frozen=True)
class CorpusIouReport:
    """Sentence-level mean is the headline number; the per-pair mean (mean of
    per-pair sentence means) is reported alongside."""

    per_pair: tuple[tuple[str, IouReport], ...]
    sentence_mean: float
    pair_mean: float


def iou(set_a: frozenset[int] | set[int], set_b: frozenset[int] | set[int]) -> float:
    """|A ∩ B| / |A ∪ B|; two empty sets agree perfectly (1.0)."""
    union = set_a | set_b
    if not union:
        return 1.0
    return len(set_a & set_b) / len(union)


def sentence_highlight_groups(
    pair: DocumentSummaryPair,
    alignments: Sequence[Alignment],
    restrict_content: bool = True,
) -> dict[int, frozenset[int]]:
    """Document token indices aligned to each summary sentence.

    An alignment contributes its document tokens to every summary sentence its
    summary spans touch. Content restriction drops non-content document
    tokens from the sets.
    """
    groups: dict[int, set[int]] = {s: set() for s in range(pair.summary.sentence_count)}
    for alignment in alignments:
        _check_alignment_refs(pair, alignment)
        doc_indices = {
            i
            for span in alignment.document_spans
            for i in span.indices()
            if not restrict_content or pair.document.tokens[i].is_content
        }
        sentences = {
            pair.summary.sentence_index_of(i)
            for span in alignment.summary_spans
            for i in span.indices()
        }
        for s in sentences:
            groups[s].update(doc_indices)
    return {s: frozenset(v) for s, v in groups.items()}


def _check_alignment_refs(pair: DocumentSummaryPair, alignment: Alignment) -> None:
    for span in alignment.summary_spans:
        if span.text_id != pair.summary.id:
            raise ValueError(
                f"alignment references summary {span.text_id}, not pair {pair.id}"
            )
    for span in alignment.document_spans:
        if span.text_id != pair.document.id:
            raise ValueError(
                f"alignment references document {span.text_id}, not pair {pair.id}"
            )


def token_iou(
    pair: DocumentSummaryPair,
    alignments_a: Sequence[Alignment],
    alignments_b: Sequence[Alignment],
    restrict_content: bool = True,
) -> IouReport:
    """Per-summary-sentence IoU between two annotators' highlights on one
    pair, over content-token index sets; the mean is over sentences."""
    groups_a = sentence_highlight_groups(pair, alignments_a, restrict_content)
    groups_b = sentence_highlight_groups(pair, alignments_b, restrict_content)
    per_sentence = tuple(
        SentenceIou(s, iou(groups_a[s], groups_b[s]))
        for s in range(pair.summary.sentence_count)
    )
    mean = (
        sum(e.iou for e in per_sentence) / len(per_sentence) if per_sentence else 1.0
    )
    return IouReport(per_sentence=per_sentence, mean_iou=mean)


def corpus_iou(
    pairs_a: Sequence[DocumentSummaryPair],
    pairs_b: Sequence[DocumentSummaryPair],
    restrict_content: bool = True,
) -> CorpusIouReport:
    """IoU between two annotated copies of the same corpus, matched by id."""
    by_id = {p.id: p for p in pairs_b}
    ids_a = {p.id for p in pairs_a}
    missing = [p.id for p in pairs_a if p.id not in by_id]
    extra = [pid for pid in by_id if pid not in ids_a]
    if missing or extra:
        raise ValueError(
            f"pair ids do not match: missing from b {missing}, extra in b {extra}"
        )
    per_pair = []
    for pair in pairs_a:
        other = by_id[pair.id]
        report = token_iou(
            pair, list(pair.alignments), list(other.alignments), restrict_content
        )
        per_pair.append((pair.id, report))
    sentence_scores = [e.iou for _, r in per_pair for e in r.per_sentence]
    pair_means = [r.mean_iou for _, r in per_pair]
    return CorpusIouReport(
        per_pair=tuple(per_pair),
        sentence_mean=sum(sentence_scores) / len(sentence_scores)
        if sentence_scores
        else 1.0,
        pair_mean=sum(pair_means) / len(pair_means) if pair_means else 1.0,
    )


# ---------------------------------------------------------------------------
# Highlight precision / recall / F1
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Prf:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class PairPrf:
    pair_id: str
    tp: int
    fp: int
    fn: int
    scores: Prf
    gold_empty: bool


@dataclass(frozen=True)
class PrfReport:
    """Macro scores average each of P/R/F1 over pairs with non-empty gold;
    micro scores come from pooled confusion counts over all pairs."""

    macro: Prf
    micro: Prf
    per_pair: tuple[PairPrf, ...]
    diagnostics: tuple[str, ...] = ()


def _prf_from_counts(tp: int, fp: int, fn: int) -> Prf:
    precision = 100.0 * tp / (tp + fp) if tp + fp else 0.0
    recall = 100.0 * tp / (tp + fn) if tp + fn else 0.0
    f1 = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall
        else 0.0
    )
    return Prf(precision, recall, f1)


def highlight_prf(
    items: Iterable[tuple[DocumentSummaryPair, HighlightSet, HighlightSet]],
    restrict_content: bool = True,
) -> PrfReport:
    """Token-index precision/recall/F1 of predicted vs gold highlight sets.

    ``items`` pairs each corpus pair with its predicted and gold highlight
    sets. Pairs with empty gold highlights are excluded from the macro
    average (their counts still pool into micro) and are reported in the
    diagnostics.
    """
    per_pair: list[PairPrf] = []
    diagnostics: list[str] = []
    pooled_tp = pooled_fp = pooled_fn = 0
    for pair, predicted, gold in items:
        for hset, name in ((predicted, "predicted"), (gold, "gold")):
            if hset.pair_id != pair.id:
                raise ValueError(
                    f"{name} highlight set belongs to pair {hset.pair_id}, "
                    f"not {pair.id}"
                )
        content = {
            i for i in range(len(pair.document.tokens))
            if pair.document.tokens[i].is_content
        }
        pred_set = predicted.token_indices()
        gold_set = gold.token_indices()
        if restrict_content:
            pred_set &= content
            gold_set &= content
        tp = len(pred_set & gold_set)
        fp = len(pred_set - gold_set)
        fn = len(gold_set - pred_set)
        pooled_tp += tp
        pooled_fp += fp
        pooled_fn += fn
        gold_empty = not gold_set
        if gold_empty:
            diagnostics.append(
                f"pair {pair.id}: empty gold highlights; excluded from macro"
            )
        per_pair.append(
            PairPrf(pair.id, tp, fp, fn, _prf_from_counts(tp, fp, fn), gold_empty)
        )
    included = [e for e in per_pair if not e.gold_empty]
    if included:
        macro = Prf(
            sum(e.scores.precision for e in included) / len(included),
            sum(e.scores.recall for e in included) / len(included),
            sum(e.scores.f1 for e in included) / len(included),
        )
    else:
        macro = Prf(0.0, 0.0, 0.0)
        diagnostics.append("no pairs with non-empty gold highlights; macro is zero")
    micro = _prf_from_counts(pooled_tp, pooled_fp, pooled_fn)
    return PrfReport(
        macro=macro,
        micro=micro,
        per_pair=tuple(per_pair),
        diagnostics=tuple(diagnostics),
    )


# ---------------------------------------------------------------------------
# ROUGE
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f: float
    diagnostics: tuple[str, ...] = ()


@dataclass(frozen=True)
class RougeReport:
    r1: RougeScore
    r2: RougeScore
    rl: RougeScore


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int) -> RougeScore:
    """Clipped n-gram overlap: recall over reference n-grams, precision over
    candidate n-grams, F with beta=1. Sides shorter than n score 0 there and
    flag a diagnostic."""
    if n not in (1, 2):
        raise ValueError(f"n must be 1 or 2, got {n}")
    cand_total = max(len(candidate) - n + 1, 0)
    ref_total = max(len(reference) - n + 1, 0)
    overlap = (
        sum((_ngram_counts(candidate, n) & _ngram_counts(reference, n)).values())
        if cand_total and ref_total
        else 0
    )
    diagnostics = []
    if not cand_total:
        diagnostics.append(f"candidate shorter than n={n}; precision undefined, reported 0")
    if not ref_total:
        diagnostics.append(f"reference shorter than n={n}; recall undefined, reported 0")
    precision = 100.0 * overlap / cand_total if cand_total else 0.0
    recall = 100.0 * overlap / ref_total if ref_total else 0.0
    f = 2.0 * precision * recall / (precision + recall) if precision + recall else 0.0
    return RougeScore(precision, recall, f, tuple(diagnostics))


def _lcs_len(a: Sequence[str], b: Sequence[str]) -> int:
    if len(b) > len(a):
        a, b = b, a
    previous = [0] * (len(b) + 1)
    for x in a:
        current = [0]
        for j, y in enumerate(b):
            if x == y:
                current.append(previous[j] + 1)
            else:
                current.append(max(previous[j + 1], current[-1]))
        previous = current
    return previous[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    """Longest-common-subsequence overlap over whole token sequences."""
    diagnostics = []
    if not candidate:
        diagnostics.append("empty candidate; reported 0")
    if not reference:
        diagnostics.append("empty reference; reported 0")
    if diagnostics:
        return RougeScore(0.0, 0.0, 0.0, tuple(diagnostics))
    lcs = _lcs_len(candidate, reference)
    precision = 100.0 * lcs / len(candidate)
    recall = 100.0 * lcs / len(reference)
    f = 2.0 * precision * recall / (precision + recall) if precision + recall else 0.0
    return RougeScore(precision, recall, f)


def normalize_tokens(
    surfaces: Sequence[str], lexicon: textproc.Lexicon | None = None
) -> list[str]:
    """ROUGE normalization: lowercase plus this package's lemmatizer;
    stopwords are retained."""
    return [textproc.lemmatize(s, lexicon) for s in surfaces]


def content_preservation(
    generated: str | Sequence[str],
    pair: DocumentSummaryPair,
    highlights: HighlightSet,
    lexicon: textproc.Lexicon | None = None,
) -> RougeReport:
    """ROUGE-1/2/L of generated text against the concatenated highlights.

    The reference is the concat encoding of the highlight set in document
    order; both sides are normalized identically (lowercase + lemmas).
    """
    if not highlights.spans:
        raise EmptyHighlightsError(f"pair {pair.id} has an empty highlight set")
    reference_surfaces = modelio.encode_concat_only(pair, highlights)
    if isinstance(generated, str):
        candidate_surfaces = [t.surface for t in textproc.tokenize(generated, lexicon)]
    else:
        candidate_surfaces = list(generated)
    candidate = normalize_tokens(candidate_surfaces, lexicon)
    reference = normalize_tokens(reference_surfaces, lexicon)
    return RougeReport(
        r1=rouge_n(candidate, reference, 1),
        r2=rouge_n(candidate, reference, 2),
        rl=rouge_l(candidate, reference),
    )


# ---------------------------------------------------------------------------
# Corpus statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StatsReport:
    unique_docs: int
    mean_summaries_per_doc: float
    pair_count: int
    mean_input_tokens: float
    max_input_tokens: int
    mean_output_tokens: float
    max_output_tokens: int
    mean_input_sentences: float
    mean_output_sentences: float
    pct_multi_sentence_alignments: float


def dataset_stats(pairs: Sequence[DocumentSummaryPair]) -> StatsReport:
    """Corpus statistics table.

    A summary sentence counts as a multi-sentence alignment when the document
    spans aligned to it touch two or more distinct document sentences; the
    percentage is over summary sentences that have at least one alignment.
    """
    if not pairs:
        return StatsReport(0, 0.0, 0, 0.0, 0, 0.0, 0, 0.0, 0.0, 0.0)
    doc_ids = {p.document.id for p in pairs}
    input_tokens = [len(p.document.tokens) for p in pairs]
    output_tokens = [len(p.summary.tokens) for p in pairs]
    input_sents = [p.document.sentence_count for p in pairs]
    output_sents = [p.summary.sentence_count for p in pairs]

    aligned_sentences = 0
    multi_sentences = 0
    for pair in pairs:
        groups = sentence_highlight_groups(pair, pair.alignments, restrict_content=False)
        for s, indices in groups.items():
            if not indices:
                continue
            aligned_sentences += 1
            doc_sents = {pair.document.sentence_index_of(i) for i in indices}
            if len(doc_sents) >= 2:
                multi_sentences += 1

    n = len(pairs)
    return StatsReport(
        unique_docs=len(doc_ids),
        mean_summaries_per_doc=n / len(doc_ids),
        pair_count=n,
        mean_input_tokens=sum(input_tokens) / n,
        max_input_tokens=max(input_tokens),
        mean_output_tokens=sum(output_tokens) / n,
        max_output_tokens=max(output_tokens),
        mean_input_sentences=sum(input_sents) / n,
        mean_output_sentences=sum(output_sents) / n,
        pct_multi_sentence_alignments=(
            100.0 * multi_sentences / aligned_sentences if aligned_sentences else 0.0
        ),
    )


# ---------------------------------------------------------------------------
# Plain-text report tables
# ---------------------------------------------------------------------------

def format_stats_table(report: StatsReport) -> str:
    rows = [
        ("#unique docs", f"{report.unique_docs}"),
        ("#summaries/doc (average)", f"{report.mean_summaries_per_doc:.2f}"),
        ("#summary-doc pairs", f"{report.pair_count}"),
        (
            "mean input/output size (tkns)",
            f"{report.mean_input_tokens:.2f}/{report.mean_output_tokens:.2f}",
        ),
        (
            "max input/output size (tkns)",
            f"{report.max_input_tokens}/{report.max_output_tokens}",
        ),
        (
            "mean input/output size (sentences)",
            f"{report.mean_input_sentences:.2f}/{report.mean_output_sentences:.2f}",
        ),
        (
            "summary sentences aligning to multiple doc sentences",
            f"{report.pct_multi_sentence_alignments:.2f} %",
        ),
    ]
    width = max(len(label) for label, _ in rows)
    return "\n".join(f"{label:<{width}}  {value}" for label, value in rows)


def format_prf_table(report: PrfReport) -> str:
    lines = [
        f"{'':<8}{'P':>8}{'R':>8}{'F1':>8}",
        f"{'macro':<8}{report.macro.precision:>8.2f}{report.macro.recall:>8.2f}"
        f"{report.macro.f1:>8.2f}",
        f"{'micro':<8}{report.micro.precision:>8.2f}{report.micro.recall:>8.2f}"
        f"{report.micro.f1:>8.2f}",
    ]
    for diag in report.diagnostics:
        lines.append(f"note: {diag}")
    return "\n".join(lines)


def format_iou_table(report: CorpusIouReport) -> str:
    # Published agreement numbers read as IoU x 100; shown alongside.
    lines = [
        f"sentence-level mean IoU  {report.sentence_mean:.4f}"
        f"  (x100: {100 * report.sentence_mean:.2f})",
        f"per-pair mean IoU        {report.pair_mean:.4f}"
        f"  (x100: {100 * report.pair_mean:.2f})",
    ]
    for pair_id, pair_report in report.per_pair:
        lines.append(f"  {pair_id}  {pair_report.mean_iou:.4f}")
    return "\n".join(lines)


def format_rouge_table(reports: Sequence[tuple[str, RougeReport]]) -> str:
    lines = [f"{'pair':<18}{'R-1':>8}{'R-2':>8}{'R-L':>8}"]
    for pair_id, report in reports:
        lines.append(
            f"{pair_id:<18}{report.r1.f:>8.2f}{report.r2.f:>8.2f}{report.rl.f:>8.2f}"
        )
    if reports:
        mean = [
            sum(getattr(r, m).f for _, r in reports) / len(reports)
            for m in ("r1", "r2", "rl")
        ]
        lines.append(f"{'mean':<18}{mean[0]:>8.2f}{mean[1]:>8.2f}{mean[2]:>8.2f}")
    return "\n".join(lines)
