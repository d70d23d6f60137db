"""End-to-end answer path, the three-case interaction protocol, and the
text-to-polarity classifier.

The classifier is a deterministic rule table standing in for a full
text-to-class model; it is a plain function so a faithful port can replace it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .embed import tokenize
from .engine import RetrievalConfig, RevisionEngine, RevisionEntry, RetrievalHit
from .prompt import render_base, render_contextualized


class Polarity(enum.IntEnum):
    BAD = -1          # bad / blameworthy
    NEUTRAL = 0       # neutral / discretionary
    GOOD = 1          # good / praiseworthy


class OutcomeCase(enum.Enum):
    MISALIGNED_NEEDS_FEEDBACK = "misaligned_needs_feedback"  # case 1
    UNCERTAIN_NO_CONTEXT = "uncertain_no_context"            # case 2
    ALIGNED_WITH_CONTEXT = "aligned_with_context"            # case 3


@dataclass
class InteractionRecord:
    query: str
    hits: list[RetrievalHit]
    prompt: str
    generated_answer: str
    predicted_polarity: Polarity
    low_confidence_polarity: bool
    outcome: OutcomeCase


NEG_WORDS = {"wrong", "bad", "rude", "shouldn't", "immoral", "unacceptable", "don't"}
NEG_BIGRAMS = {("should", "not"), ("not", "okay"), ("do", "not")}
POS_WORDS = {"good", "right", "fine", "acceptable", "moral"}
NEU_WORDS = {"okay", "ok", "depends", "discretionary", "expected", "understandable"}
NEGATORS = {"not", "never", "n't"}


def classify_polarity(text: str) -> tuple[Polarity, bool]:
    """Map generated text to a polarity class.

    A leading yes/no decides directly; otherwise polarity lexemes are counted
    and the majority wins. No lexeme or a tie yields neutral with a
    low-confidence flag.
    """
    tokens = tokenize(text)
    if tokens:
        if tokens[0] == "no":
            return Polarity.BAD, False
        if tokens[0] == "yes":
            return Polarity.GOOD, False
    counts = {Polarity.BAD: 0, Polarity.NEUTRAL: 0, Polarity.GOOD: 0}
    consumed = [False] * len(tokens)
    for i in range(len(tokens) - 1):
        if (tokens[i], tokens[i + 1]) in NEG_BIGRAMS:
            counts[Polarity.BAD] += 1
            consumed[i] = consumed[i + 1] = True
    for i, tok in enumerate(tokens):
        if consumed[i]:
            continue
        if tok in NEG_WORDS:
            counts[Polarity.BAD] += 1
        elif tok in POS_WORDS:
            counts[Polarity.GOOD] += 1
        elif tok in NEU_WORDS:
            counts[Polarity.NEUTRAL] += 1
        elif tok == "should":
            # positive only without a negator in the two preceding tokens
            window = tokens[max(0, i - 2):i]
            if not any(w in NEGATORS for w in window):
                counts[Polarity.GOOD] += 1
    best = max(counts.values())
    if best == 0 or sum(1 for v in counts.values() if v == best) > 1:
        return Polarity.NEUTRAL, True
    winner = max(counts, key=lambda p: counts[p])
    return winner, False


def answer(query: str, engine: RevisionEngine, generator,
           config: RetrievalConfig | None = None) -> InteractionRecord:
    """Run the full path: embed, retrieve, contextualize, generate, classify.

    With no hit at or above the threshold, the bare base prompt is used and
    the outcome is the uncertainty case; otherwise the outcome is
    provisionally aligned until :func:`resolve_outcome` applies the user's
    verdict.
    """
    config = config or RetrievalConfig()
    query_embedding = engine.embedder(query)
    hits = engine.retrieve(query_embedding, config)
    if hits:
        contexts = [(engine.get(h.entry_id), h.similarity) for h in hits]
        prompt = render_contextualized(query, contexts, config.template)
        outcome = OutcomeCase.ALIGNED_WITH_CONTEXT
    else:
        prompt = render_base(query)
        outcome = OutcomeCase.UNCERTAIN_NO_CONTEXT
    generated = generator(prompt)
    polarity, low_confidence = classify_polarity(generated)
    return InteractionRecord(
        query=query,
        hits=hits,
        prompt=prompt,
        generated_answer=generated,
        predicted_polarity=polarity,
        low_confidence_polarity=low_confidence,
        outcome=outcome,
    )


def baseline_record(query: str, generator) -> InteractionRecord:
    """The bare baseline path: no engine, base prompt only. Behaviorally
    identical to :func:`answer` with an empty corpus."""
    prompt = render_base(query)
    generated = generator(prompt)
    polarity, low_confidence = classify_polarity(generated)
    return InteractionRecord(
        query=query,
        hits=[],
        prompt=prompt,
        generated_answer=generated,
        predicted_polarity=polarity,
        low_confidence_polarity=low_confidence,
        outcome=OutcomeCase.UNCERTAIN_NO_CONTEXT,
    )


def resolve_outcome(record: InteractionRecord, user_verdict: str = "none") -> OutcomeCase:
    """Finalize the interaction case. No context always means the uncertainty
    case; with context, a rejection marks misalignment and anything else
    (explicit accept or silence) confirms alignment."""
    if user_verdict not in ("accept", "reject", "none"):
        raise ValueError(f"unknown verdict {user_verdict!r}")
    if not record.hits:
        return OutcomeCase.UNCERTAIN_NO_CONTEXT
    if user_verdict == "reject":
        return OutcomeCase.MISALIGNED_NEEDS_FEEDBACK
    return OutcomeCase.ALIGNED_WITH_CONTEXT


def apply_feedback(query: str, corrected_answer: str, polarity: int,
                   engine: RevisionEngine) -> RevisionEntry:
    """Store corrective feedback; a repeated query upserts the existing entry."""
    return engine.add_entry(query, corrected_answer, int(polarity), source="user")
