"""NLG and polarity evaluation.

Sentence-level BLEU, ROUGE-L, and a simplified exact-match METEOR, plus
embedding similarity and polarity accuracy, aggregated as the mean of
sentence scores. A diagnostic counter flags rows where the polarity matches
but BLEU-1 is low, the symptom of answers that are right in judgment but
phrased differently (e.g. on negated questions).
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass

from .embed import cosine_similarity, tokenize
from .errors import InvalidInputError

METEOR_ALPHA = 0.9
METEOR_BETA = 3.0
METEOR_GAMMA = 0.5


@dataclass
class EvalReport:
    bleu1: float
    bleu3: float
    rouge_l: float
    meteor: float
    embed_sim: float
    polarity_acc: float
    polarity_acc_binary: float
    n_total: int
    n_contextualized: int
    feedback_count: int = 0
    negative_question_flags: int = 0

    def to_line(self) -> str:
        """One-line JSON record with the standard column names."""
        return json.dumps({
            "feedback": self.feedback_count,
            "bleu1": self.bleu1,
            "bleu3": self.bleu3,
            "rougeL": self.rouge_l,
            "meteor": self.meteor,
            "acc": self.polarity_acc,
            "embed_sim": self.embed_sim,
            "n_total": self.n_total,
            "n_contextualized": self.n_contextualized,
        })


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu_n(candidate: str, reference: str, n: int = 1) -> float:
    """Sentence BLEU with uniform weights over orders 1..n.

    Add-1 smoothing applies to orders >= 2 only when the raw clipped count is
    zero, so BLEU-1 stays exact.
    """
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return 0.0
    log_sum = 0.0
    for order in range(1, n + 1):
        cand_grams = _ngrams(cand, order)
        total = sum(cand_grams.values())
        if total == 0:
            return 0.0
        ref_grams = _ngrams(ref, order)
        clipped = sum(min(count, ref_grams[g]) for g, count in cand_grams.items())
        if clipped == 0:
            if order == 1:
                return 0.0
            precision = 1.0 / (total + 1)
        else:
            precision = clipped / total
        log_sum += math.log(precision)
    bp = 1.0 if len(cand) >= len(ref) else math.exp(1.0 - len(ref) / len(cand))
    return bp * math.exp(log_sum / n)


def _lcs_length(a: list[str], b: list[str]) -> int:
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> float:
    """LCS-based F1."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return 0.0
    lcs = _lcs_length(cand, ref)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return 2 * precision * recall / (precision + recall)


def _align(cand: list[str], ref: list[str]) -> tuple[int, int]:
    """Greedy left-to-right exact-match alignment, preferring the reference
    position that extends the current chunk. Returns (matches, chunks)."""
    budget = Counter(cand) & Counter(ref)  # max-cardinality match per token
    used: set[int] = set()
    prev = -2
    matches = chunks = 0
    for tok in cand:
        if budget[tok] <= 0:
            continue
        j = None
        if 0 <= prev + 1 < len(ref) and ref[prev + 1] == tok and prev + 1 not in used:
            j = prev + 1
        else:
            for k, r in enumerate(ref):
                if r == tok and k not in used:
                    j = k
                    break
        budget[tok] -= 1
        used.add(j)
        matches += 1
        if j != prev + 1:
            chunks += 1
        prev = j
    return matches, chunks


def meteor(candidate: str, reference: str) -> float:
    """Exact-match unigram METEOR with the canonical alpha/beta/gamma."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return 0.0
    matches, chunks = _align(cand, ref)
    if matches == 0:
        return 0.0
    precision = matches / len(cand)
    recall = matches / len(ref)
    fmean = precision * recall / (METEOR_ALPHA * precision + (1 - METEOR_ALPHA) * recall)
    penalty = METEOR_GAMMA * (chunks / matches) ** METEOR_BETA
    return fmean * (1.0 - penalty)


def embed_similarity(candidate: str, reference: str, embedder) -> float:
    """Cosine of the two embeddings, clamped to [0, 1] for reporting."""
    sim = cosine_similarity(embedder(candidate), embedder(reference))
    return max(0.0, sim)


def polarity_accuracy(predictions, golds, binary: bool = False) -> float:
    """Fraction of class matches; binary mode collapses {0, +1} vs {-1}."""
    if len(predictions) != len(golds):
        raise InvalidInputError(
            f"length mismatch: {len(predictions)} predictions vs {len(golds)} golds")
    if not predictions:
        raise InvalidInputError("empty inputs")
    if binary:
        hits = sum((int(p) == -1) == (int(g) == -1) for p, g in zip(predictions, golds))
    else:
        hits = sum(int(p) == int(g) for p, g in zip(predictions, golds))
    return hits / len(predictions)


def evaluate(records, golds, embedder, feedback_count: int = 0) -> EvalReport:
    """Score a batch of interaction records against gold examples.

    Corpus scores are arithmetic means of sentence scores.
    """
    if len(records) != len(golds):
        raise InvalidInputError(
            f"length mismatch: {len(records)} records vs {len(golds)} golds")
    if not records:
        raise InvalidInputError("empty inputs")
    n = len(records)
    bleu1_sum = bleu3_sum = rouge_sum = meteor_sum = sim_sum = 0.0
    negative_question_flags = 0
    predictions = []
    gold_polarities = []
    n_contextualized = 0
    for rec, gold in zip(records, golds):
        b1 = bleu_n(rec.generated_answer, gold.gold_answer, 1)
        bleu1_sum += b1
        bleu3_sum += bleu_n(rec.generated_answer, gold.gold_answer, 3)
        rouge_sum += rouge_l(rec.generated_answer, gold.gold_answer)
        meteor_sum += meteor(rec.generated_answer, gold.gold_answer)
        sim_sum += embed_similarity(rec.generated_answer, gold.gold_answer, embedder)
        predictions.append(int(rec.predicted_polarity))
        gold_polarities.append(int(gold.gold_polarity))
        if rec.hits:
            n_contextualized += 1
        if int(rec.predicted_polarity) == int(gold.gold_polarity) and b1 < 0.5:
            negative_question_flags += 1
    return EvalReport(
        bleu1=bleu1_sum / n,
        bleu3=bleu3_sum / n,
        rouge_l=rouge_sum / n,
        meteor=meteor_sum / n,
        embed_sim=sim_sum / n,
        polarity_acc=polarity_accuracy(predictions, gold_polarities),
        polarity_acc_binary=polarity_accuracy(predictions, gold_polarities, binary=True),
        n_total=n,
        n_contextualized=n_contextualized,
        feedback_count=feedback_count,
        negative_question_flags=negative_question_flags,
    )
