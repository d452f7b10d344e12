import random

import pytest

from testutil import (
    lcs_table,
    make_pair,
    ngram_overlap,
    stats_fixture_pairs,
    with_alignments,
)
from textreduce import evalsuite
from textreduce.corpus import (
    Alignment,
    EmptyHighlightsError,
    HighlightSet,
    Span,
    highlights_of,
)
from textreduce.evalsuite import (
    content_preservation,
    corpus_iou,
    dataset_stats,
    highlight_prf,
    iou,
    rouge_l,
    rouge_n,
    token_iou,
)
from textreduce.modelio import encode_concat_only

WORDS = "ember quartz violet meadow harbor lantern orchid saddle tundra jasper".split()


def _pair_with_two_annotations(doc_raw, sum_raw, ranges_a, ranges_b):
    pair = make_pair(doc_raw, sum_raw)
    n_sum = len(pair.summary.tokens)

    def build(ranges, who):
        return [
            Alignment(
                summary_spans=(Span(pair.summary.id, 0, n_sum),),
                document_spans=tuple(Span(pair.document.id, s, e) for s, e in rs),
                annotator_id=who,
            )
            for rs in ranges
        ]

    return pair, build(ranges_a, "a"), build(ranges_b, "b")


class TestIou:
    def test_identical_sets(self):
        pair, al_a, al_b = _pair_with_two_annotations(
            "Harbor lanterns glowed dimly.", "Lanterns glowed.", [[(0, 3)]], [[(0, 3)]]
        )
        report = token_iou(pair, al_a, al_b)
        assert [e.iou for e in report.per_sentence] == [1.0]
        assert report.mean_iou == 1.0

    def test_disjoint_nonempty_sets(self):
        pair, al_a, al_b = _pair_with_two_annotations(
            "Ember quartz violet meadow harbor.", "Quartz meadow.", [[(0, 2)]], [[(2, 4)]]
        )
        report = token_iou(pair, al_a, al_b)
        assert report.mean_iou == 0.0

    def test_four_vs_three_token_sets(self):
        # content tokens {1,2,3,4} vs {3,4,5} -> IoU 2/5
        raw = "of ember quartz violet meadow harbor in the"
        pair, al_a, al_b = _pair_with_two_annotations(
            raw, "Ember harbor.", [[(1, 5)]], [[(3, 6)]]
        )
        report = token_iou(pair, al_a, al_b)
        assert report.mean_iou == pytest.approx(0.4)

    def test_both_empty_scores_one(self):
        pair = make_pair("Ember quartz violet.", "Quartz. Violet.")
        report = token_iou(pair, [], [])
        assert [e.iou for e in report.per_sentence] == [1.0, 1.0]

    def test_content_restriction_drops_stopwords(self):
        raw = "the ember of the quartz"
        pair, al_a, al_b = _pair_with_two_annotations(
            raw, "Ember quartz.", [[(0, 2)]], [[(1, 2)]]
        )
        # annotator a also covers "the", but only "ember" counts
        assert token_iou(pair, al_a, al_b).mean_iou == 1.0
        assert token_iou(pair, al_a, al_b, restrict_content=False).mean_iou == 0.5

    def test_mismatched_pair_rejected(self):
        pair = make_pair("Ember quartz violet.", "Quartz.")
        other = make_pair("Different text here.", "Other.")
        foreign = Alignment(
            summary_spans=(Span(other.summary.id, 0, 1),),
            document_spans=(Span(other.document.id, 0, 1),),
            annotator_id="a",
        )
        with pytest.raises(ValueError):
            token_iou(pair, [foreign], [])

    def test_symmetry_bounds_and_brute_force(self):
        rng = random.Random(99)
        raw = " ".join(rng.choice(WORDS) for _ in range(30))
        pair = make_pair(raw, "Ember quartz. Violet meadow.")
        n = len(pair.document.tokens)
        content = {i for i, t in enumerate(pair.document.tokens) if t.is_content}
        for _ in range(100):
            def random_alignments(who):
                out = []
                for s in range(pair.summary.sentence_count):
                    for _ in range(rng.randint(0, 2)):
                        start = rng.randrange(0, n)
                        end = min(n, start + rng.randint(1, 5))
                        sent = pair.summary.sentence_bounds[s]
                        out.append(
                            Alignment(
                                summary_spans=(Span(pair.summary.id, sent[0], sent[1]),),
                                document_spans=(Span(pair.document.id, start, end),),
                                annotator_id=who,
                            )
                        )
                return out

            al_a = random_alignments("a")
            al_b = random_alignments("b")
            report_ab = token_iou(pair, al_a, al_b)
            report_ba = token_iou(pair, al_b, al_a)
            for e_ab, e_ba in zip(report_ab.per_sentence, report_ba.per_sentence):
                assert e_ab.iou == e_ba.iou
                assert 0.0 <= e_ab.iou <= 1.0
            # brute-force recomputation per sentence
            for s in range(pair.summary.sentence_count):
                sent = pair.summary.sentence_bounds[s]

                def tokens_of(alignments):
                    out = set()
                    for a in alignments:
                        touches = any(
                            sent[0] <= i < sent[1]
                            for sp in a.summary_spans
                            for i in sp.indices()
                        )
                        if touches:
                            for sp in a.document_spans:
                                out.update(i for i in sp.indices() if i in content)
                    return out

                set_a, set_b = tokens_of(al_a), tokens_of(al_b)
                expected = (
                    len(set_a & set_b) / len(set_a | set_b) if set_a | set_b else 1.0
                )
                assert report_ab.per_sentence[s].iou == expected

    def test_corpus_iou_requires_matching_ids(self):
        pair_a = make_pair("Ember quartz violet.", "Quartz.")
        pair_b = make_pair("Totally different doc.", "Other.")
        with pytest.raises(ValueError, match="ids"):
            corpus_iou([pair_a], [pair_b])

    def test_corpus_iou_reports_both_means(self):
        pair = make_pair("Ember quartz violet meadow.", "Quartz meadow.")
        alignment = Alignment(
            summary_spans=(Span(pair.summary.id, 0, 2),),
            document_spans=(Span(pair.document.id, 0, 2),),
            annotator_id="a",
        )
        annotated = with_alignments(pair, [alignment])
        report = corpus_iou([annotated], [annotated])
        assert report.sentence_mean == 1.0
        assert report.pair_mean == 1.0


class TestHighlightPrf:
    def _item(self, doc_raw, pred_ranges, gold_ranges):
        pair = make_pair(doc_raw, "Unused summary.")
        return (
            pair,
            HighlightSet(pair.id, tuple(Span(pair.document.id, s, e) for s, e in pred_ranges)),
            HighlightSet(pair.id, tuple(Span(pair.document.id, s, e) for s, e in gold_ranges)),
        )

    def test_perfect_prediction(self):
        items = [
            self._item("ember quartz violet meadow harbor", [(0, 3)], [(0, 3)]),
            self._item("lantern orchid saddle tundra jasper", [(1, 4)], [(1, 4)]),
        ]
        report = highlight_prf(items)
        for scores in (report.macro, report.micro):
            assert (scores.precision, scores.recall, scores.f1) == (100.0, 100.0, 100.0)

    def test_empty_prediction_zero_recall(self):
        pair = make_pair("ember quartz violet meadow", "Unused.")
        items = [
            (
                pair,
                HighlightSet(pair.id),
                HighlightSet(pair.id, (Span(pair.document.id, 0, 2),)),
            )
        ]
        report = highlight_prf(items)
        assert report.macro.recall == 0.0
        assert report.micro.recall == 0.0

    def test_two_pair_hand_counts(self):
        # pair 1: tp=3 fp=1 fn=1; pair 2: tp=1 fp=1 fn=3 (all content words)
        items = [
            self._item("ember quartz violet meadow harbor", [(0, 4)], [(0, 3), (4, 5)]),
            self._item("lantern orchid saddle tundra jasper", [(0, 2)], [(1, 5)]),
        ]
        report = highlight_prf(items)
        assert (report.per_pair[0].tp, report.per_pair[0].fp, report.per_pair[0].fn) == (3, 1, 1)
        assert (report.per_pair[1].tp, report.per_pair[1].fp, report.per_pair[1].fn) == (1, 1, 3)
        p1, r1 = 100 * 3 / 4, 100 * 3 / 4
        f1 = 2 * p1 * r1 / (p1 + r1)
        p2, r2 = 100 * 1 / 2, 100 * 1 / 4
        f2 = 2 * p2 * r2 / (p2 + r2)
        assert report.macro.precision == pytest.approx((p1 + p2) / 2)
        assert report.macro.recall == pytest.approx((r1 + r2) / 2)
        assert report.macro.f1 == pytest.approx((f1 + f2) / 2)
        micro_p = 100 * 4 / 6
        micro_r = 100 * 4 / 8
        assert report.micro.precision == pytest.approx(micro_p)
        assert report.micro.recall == pytest.approx(micro_r)
        assert report.micro.f1 == pytest.approx(2 * micro_p * micro_r / (micro_p + micro_r))
        assert report.macro.precision != report.micro.precision

    def test_empty_gold_excluded_from_macro_but_pooled(self):
        items = [
            self._item("ember quartz violet meadow", [(0, 2)], [(0, 2)]),
            self._item("lantern orchid saddle tundra", [(0, 2)], []),
        ]
        report = highlight_prf(items)
        assert report.macro.precision == 100.0
        assert report.per_pair[1].gold_empty
        assert any("excluded from macro" in d for d in report.diagnostics)
        # micro pools the 2 false positives from the gold-empty pair
        assert report.micro.precision == pytest.approx(100 * 2 / 4)

    def test_micro_equals_macro_on_identical_counts(self):
        items = [
            self._item("ember quartz violet meadow harbor", [(0, 3)], [(1, 4)]),
            self._item("lantern orchid saddle tundra jasper", [(0, 3)], [(1, 4)]),
        ]
        report = highlight_prf(items)
        assert report.macro.precision == pytest.approx(report.micro.precision)
        assert report.macro.recall == pytest.approx(report.micro.recall)


class TestRougeN:
    def test_identical(self):
        tokens = "the cat sat on the mat".split()
        for n in (1, 2):
            score = rouge_n(tokens, tokens, n)
            assert (score.precision, score.recall, score.f) == (100.0, 100.0, 100.0)

    def test_disjoint(self):
        score = rouge_n("a b c".split(), "x y z".split(), 1)
        assert (score.precision, score.recall, score.f) == (0.0, 0.0, 0.0)

    def test_cat_sat_vs_cat_ran(self):
        score = rouge_n("the cat sat".split(), "the cat ran".split(), 1)
        assert score.precision == pytest.approx(100 * 2 / 3)
        assert score.recall == pytest.approx(100 * 2 / 3)

    def test_clipping_matches_oracle(self):
        candidate = "a a a b".split()
        reference = "a b b".split()
        overlap, cand_total, ref_total = ngram_overlap(candidate, reference, 1)
        assert overlap == 2  # one 'a' (clipped) + one 'b'
        score = rouge_n(candidate, reference, 1)
        assert score.precision == pytest.approx(100 * overlap / cand_total)
        assert score.recall == pytest.approx(100 * overlap / ref_total)

    def test_reference_shorter_than_n(self):
        score = rouge_n("a b".split(), ["a"], 2)
        assert score.recall == 0.0
        assert any("reference" in d for d in score.diagnostics)

    def test_invalid_n(self):
        with pytest.raises(ValueError):
            rouge_n(["a"], ["a"], 3)

    def test_permutation_invariance_unigrams_only(self):
        rng = random.Random(5)
        candidate = [rng.choice("abc") for _ in range(10)]
        reference = [rng.choice("abc") for _ in range(8)]
        shuffled = candidate[:]
        rng.shuffle(shuffled)
        assert rouge_n(candidate, reference, 1) == rouge_n(shuffled, reference, 1)
        # explicit bigram counterexample
        a = "x y z".split()
        a_perm = "y x z".split()
        ref = "x y".split()
        assert rouge_n(a, ref, 2) != rouge_n(a_perm, ref, 2)


class TestRougeL:
    def test_identical(self):
        tokens = "ember quartz violet".split()
        score = rouge_l(tokens, tokens)
        assert (score.precision, score.recall, score.f) == (100.0, 100.0, 100.0)

    def test_reversed_distinct_sequence(self):
        tokens = "a b c d e".split()
        score = rouge_l(tokens, tokens[::-1])
        assert score.precision == pytest.approx(100 * 1 / 5)

    def test_abcd_vs_acbd(self):
        score = rouge_l("a b c d".split(), "a c b d".split())
        assert score.precision == 75.0
        assert score.recall == 75.0

    def test_empty_sides(self):
        score = rouge_l([], "a b".split())
        assert (score.precision, score.recall, score.f) == (0.0, 0.0, 0.0)
        assert score.diagnostics

    def test_matches_dp_oracle_on_random_sequences(self):
        rng = random.Random(17)
        for _ in range(1000):
            a = [rng.choice("abcd") for _ in range(rng.randint(1, 12))]
            b = [rng.choice("abcd") for _ in range(rng.randint(1, 12))]
            expected = lcs_table(a, b)
            score = rouge_l(a, b)
            assert score.precision == pytest.approx(100 * expected / len(a))
            assert score.recall == pytest.approx(100 * expected / len(b))


class TestContentPreservation:
    def _annotated_pair(self):
        pair = make_pair(
            "The winner won a great prize. The judges cheered loudly.",
            "The winner won. Judges cheered.",
        )
        alignment = Alignment(
            summary_spans=(Span(pair.summary.id, 0, 3),),
            document_spans=(Span(pair.document.id, 0, 3), Span(pair.document.id, 7, 9)),
            annotator_id="w",
        )
        return with_alignments(pair, [alignment])

    def test_fixed_point_all_hundred(self):
        pair = self._annotated_pair()
        highlights = highlights_of(pair)
        generated = encode_concat_only(pair, highlights)
        report = content_preservation(generated, pair, highlights)
        for score in (report.r1, report.r2, report.rl):
            assert (score.precision, score.recall, score.f) == (100.0, 100.0, 100.0)

    def test_fixed_point_from_joined_string(self):
        pair = self._annotated_pair()
        highlights = highlights_of(pair)
        generated = " ".join(encode_concat_only(pair, highlights))
        report = content_preservation(generated, pair, highlights)
        assert report.rl.f == 100.0

    def test_empty_generated_zeros_with_diagnostics(self):
        pair = self._annotated_pair()
        report = content_preservation("", pair, highlights_of(pair))
        assert report.r1.f == 0.0
        assert report.rl.diagnostics

    def test_empty_highlights_error(self):
        pair = self._annotated_pair()
        with pytest.raises(EmptyHighlightsError):
            content_preservation("text", pair, HighlightSet(pair.id))

    def test_normalization_uses_lemmas(self):
        pair = self._annotated_pair()
        highlights = highlights_of(pair)
        # same content, different inflection and case
        report = content_preservation("the winners win the judge cheers", pair, highlights)
        assert report.r1.recall > 50.0


class TestDatasetStats:
    def test_empty_corpus(self):
        report = dataset_stats([])
        assert report.pair_count == 0
        assert report.unique_docs == 0
        assert report.pct_multi_sentence_alignments == 0.0

    def test_hand_computed_fixture(self):
        report = dataset_stats(stats_fixture_pairs())
        assert report.unique_docs == 3
        assert report.pair_count == 6
        assert report.mean_summaries_per_doc == 2.0
        assert report.mean_input_tokens == 11.0
        assert report.max_input_tokens == 14
        assert report.mean_output_tokens == 22 / 6
        assert report.max_output_tokens == 5
        assert report.mean_input_sentences == 14 / 6
        assert report.mean_output_sentences == 1.0
        assert report.pct_multi_sentence_alignments == 25.0

    def test_single_sentence_alignments_give_zero_pct(self):
        pairs = [
            p
            for i, p in enumerate(stats_fixture_pairs())
            if i != 1  # drop the multi-sentence pair
        ]
        report = dataset_stats(pairs)
        assert report.pct_multi_sentence_alignments == 0.0


class TestFormatting:
    def test_stats_table_layout(self):
        text = evalsuite.format_stats_table(dataset_stats(stats_fixture_pairs()))
        assert "#unique docs" in text
        assert "2.00" in text  # summaries per doc
        assert "25.00 %" in text

    def test_prf_table(self):
        pair = make_pair("ember quartz violet", "Unused.")
        hs = HighlightSet(pair.id, (Span(pair.document.id, 0, 2),))
        text = evalsuite.format_prf_table(highlight_prf([(pair, hs, hs)]))
        assert "macro" in text and "micro" in text and "100.00" in text
