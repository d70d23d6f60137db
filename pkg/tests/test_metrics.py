import json

import pytest
from hypothesis import given, strategies as st

from rit.embed import HashEmbedder
from rit.engine import RetrievalHit
from rit.errors import InvalidInputError
from rit.metrics import (
    EvalReport,
    bleu_n,
    embed_similarity,
    evaluate,
    meteor,
    polarity_accuracy,
    rouge_l,
)
from rit.pipeline import InteractionRecord, OutcomeCase, Polarity
from rit.simulate import LabeledExample


class TestBleu:
    def test_identity(self):
        for n in (1, 2, 3):
            assert bleu_n("the cat sat down", "the cat sat down", n) == \
                pytest.approx(1.0, abs=1e-12)

    def test_clipped_precision_hand_value(self):
        # candidate "the the the" vs reference "the cat": clipped count 1 of 3,
        # brevity penalty 1 since the candidate is longer
        assert bleu_n("the the the", "the cat", 1) == pytest.approx(1 / 3, abs=1e-9)

    def test_disjoint(self):
        assert bleu_n("alpha beta", "gamma delta", 1) == 0.0

    def test_empty(self):
        assert bleu_n("", "reference", 1) == 0.0
        assert bleu_n("candidate", "...", 1) == 0.0

    def test_brevity_penalty(self):
        # unigram precision 1, c=1 < r=2 -> BP = exp(1 - 2) = exp(-1)
        import math
        assert bleu_n("the", "the cat", 1) == pytest.approx(math.exp(-1), abs=1e-12)

    def test_smoothing_only_above_order_one(self):
        # "a b" vs "b a": p1 = 1 exactly; p2 raw numerator 0 -> smoothed
        assert bleu_n("a b", "b a", 1) == pytest.approx(1.0, abs=1e-12)
        assert 0.0 < bleu_n("a b", "b a", 2) < 1.0

    @given(st.lists(st.sampled_from("abcde"), min_size=1, max_size=8),
           st.lists(st.sampled_from("abcde"), min_size=1, max_size=8))
    def test_non_increasing_in_n_without_smoothing(self, cand, ref):
        candidate, reference = " ".join(cand), " ".join(ref)
        scores = [bleu_n(candidate, reference, n) for n in (1, 2, 3)]
        # only comparable while no smoothing triggered (all orders matched)
        if all(s > 0 for s in scores) and len(cand) >= 3:
            from collections import Counter

            def raw_hit(n):
                cg = Counter(tuple(cand[i:i + n]) for i in range(len(cand) - n + 1))
                rg = Counter(tuple(ref[i:i + n]) for i in range(len(ref) - n + 1))
                return sum(min(c, rg[g]) for g, c in cg.items()) > 0

            if all(raw_hit(n) for n in (1, 2, 3)):
                assert scores[0] >= scores[1] - 1e-12
                assert scores[1] >= scores[2] - 1e-12


class TestRougeL:
    def test_identity(self):
        assert rouge_l("a b c", "a b c") == pytest.approx(1.0, abs=1e-12)

    def test_hand_lcs(self):
        # LCS("a b c d", "a c d") = 3; P = 3/4, R = 1, F1 = 6/7
        assert rouge_l("a b c d", "a c d") == pytest.approx(6 / 7, abs=1e-9)

    def test_disjoint(self):
        assert rouge_l("a b", "c d") == 0.0

    def test_one_iff_identical_sequences(self):
        assert rouge_l("a b", "b a") < 1.0
        assert rouge_l("The Cat!", "the cat") == pytest.approx(1.0, abs=1e-12)

    def test_range(self):
        for cand, ref in (("a b c", "b c d"), ("x", "x y z"), ("a a a", "a")):
            assert 0.0 <= rouge_l(cand, ref) <= 1.0


class TestMeteor:
    def test_no_common_tokens(self):
        assert meteor("a b", "c d") == 0.0

    def test_identical_four_tokens(self):
        # P=R=1, Fmean=1, chunks=1, matches=4, penalty = 0.5 * (1/4)^3
        assert meteor("a b c d", "a b c d") == pytest.approx(0.9921875, abs=1e-9)

    def test_swapped_pair(self):
        # matches 2, chunks 2, P=R=1, penalty = 0.5 -> 0.5
        assert meteor("a b", "b a") == pytest.approx(0.5, abs=1e-9)

    def test_below_one_even_when_identical(self):
        for text in ("a", "a b", "a b c d e f"):
            assert meteor(text, text) < 1.0


class TestEmbedSimilarity:
    def test_identical(self, hash_embedder):
        assert embed_similarity("same words", "same words", hash_embedder) == \
            pytest.approx(1.0, abs=1e-12)

    def test_clamped_to_zero(self, hash_embedder):
        # any negative cosine is reported as 0
        values = [embed_similarity(f"w{i}", f"v{i}", hash_embedder) for i in range(20)]
        assert all(v >= 0.0 for v in values)


class TestPolarityAccuracy:
    def test_all_equal(self):
        assert polarity_accuracy([1, -1, 0], [1, -1, 0]) == 1.0

    def test_half(self):
        assert polarity_accuracy([1, -1], [1, 1]) == 0.5

    def test_binary_collapse(self):
        assert polarity_accuracy([0, 1], [1, 1]) == 0.5
        assert polarity_accuracy([0, 1], [1, 1], binary=True) == 1.0

    def test_invalid(self):
        with pytest.raises(InvalidInputError):
            polarity_accuracy([1], [1, -1])
        with pytest.raises(InvalidInputError):
            polarity_accuracy([], [])


def record(answer, polarity, hits=()):
    return InteractionRecord(
        query="q", hits=list(hits), prompt="Question: q Answer:",
        generated_answer=answer, predicted_polarity=Polarity(polarity),
        low_confidence_polarity=False,
        outcome=OutcomeCase.ALIGNED_WITH_CONTEXT if hits
        else OutcomeCase.UNCERTAIN_NO_CONTEXT,
    )


def gold(answer, polarity):
    return LabeledExample(query="q", gold_answer=answer, gold_polarity=polarity)


class TestEvaluate:
    def test_perfect_single_row(self, hash_embedder):
        hit = RetrievalHit(entry_id="e1", similarity=1.0, rank=1)
        report = evaluate([record("No, it is wrong.", -1, [hit])],
                          [gold("No, it is wrong.", -1)], hash_embedder)
        assert report.bleu1 == pytest.approx(1.0, abs=1e-12)
        assert report.rouge_l == pytest.approx(1.0, abs=1e-12)
        assert report.polarity_acc == 1.0
        assert report.n_contextualized == 1

    def test_mean_of_sentence_scores(self, hash_embedder):
        report = evaluate(
            [record("same answer", 0), record("unrelated words", 0)],
            [gold("same answer", 0), gold("expected text", 0)], hash_embedder)
        assert report.bleu1 == pytest.approx(0.5, abs=1e-12)

    def test_mean_matches_bruteforce(self, hash_embedder):
        records = [record(f"answer number {i}", (i % 3) - 1) for i in range(6)]
        golds = [gold(f"answer count {i}", ((i + 1) % 3) - 1) for i in range(6)]
        report = evaluate(records, golds, hash_embedder)
        expected_b1 = sum(
            bleu_n(r.generated_answer, g.gold_answer, 1)
            for r, g in zip(records, golds)) / 6
        expected_meteor = sum(
            meteor(r.generated_answer, g.gold_answer)
            for r, g in zip(records, golds)) / 6
        assert report.bleu1 == pytest.approx(expected_b1, abs=1e-12)
        assert report.meteor == pytest.approx(expected_meteor, abs=1e-12)

    def test_contextualized_count(self, hash_embedder):
        hit = RetrievalHit(entry_id="e1", similarity=0.9, rank=1)
        report = evaluate([record("a", 0, [hit]), record("a", 0)],
                          [gold("a", 0), gold("a", 0)], hash_embedder)
        assert report.n_contextualized == 1
        assert report.n_total == 2

    def test_negative_question_flag(self, hash_embedder):
        # polarity matches but wording is disjoint -> flagged
        report = evaluate([record("No, you shouldn't.", -1)],
                          [gold("That would be wrong of anyone.", -1)], hash_embedder)
        assert report.negative_question_flags == 1

    def test_misaligned_lengths(self, hash_embedder):
        with pytest.raises(InvalidInputError):
            evaluate([record("a", 0)], [], hash_embedder)

    def test_report_line_columns(self, hash_embedder):
        report = evaluate([record("a", 0)], [gold("a", 0)], hash_embedder,
                          feedback_count=7)
        row = json.loads(report.to_line())
        assert list(row) == ["feedback", "bleu1", "bleu3", "rougeL", "meteor",
                             "acc", "embed_sim", "n_total", "n_contextualized"]
        assert row["feedback"] == 7
