"""Prompt construction.

Base prompt: ``Question: {query} Answer:``. Contextualization prepends one
block per retrieved entry, either as a Q/A pair (variant i) or as a
declarative ``Context:`` statement (variant ii). Blocks are ordered by
ascending similarity so the most similar context sits next to the final
question. Marker strings inside user text are passed through verbatim; the
service layer flags the resulting injection hazard, this module does not.
"""

from __future__ import annotations

from .errors import EmptyTextError, InvalidConfigError, NoContextError

QA_PAIR = "qa_pair"
CONTEXT_STATEMENT = "context_statement"

QUESTION_MARKER = "Question: "
ANSWER_MARKER = " Answer:"
CONTEXT_MARKER = "Context: "

# Entries ingested as standalone statements carry this sentinel answer,
# which is trimmed at render time.
STATEMENT_ANSWER = "."


def render_base(query: str) -> str:
    if not query or not query.strip():
        raise EmptyTextError("query is empty")
    return f"Question: {query} Answer:"


def declarative_text(query_text: str, answer_text: str) -> str:
    """Statement form of an entry: the Q/A concatenation, or the bare
    statement when the answer is the sentinel period."""
    if answer_text == STATEMENT_ANSWER:
        return query_text
    return f"{query_text} {answer_text}"


def render_contextualized(query: str, contexts, variant: str = QA_PAIR) -> str:
    """Render the prompt with retrieved contexts prepended.

    ``contexts`` is an ordered list of (entry, similarity) pairs, already
    threshold-filtered by the caller.
    """
    if not contexts:
        raise NoContextError("no contexts given; use render_base instead")
    if variant not in (QA_PAIR, CONTEXT_STATEMENT):
        raise InvalidConfigError(f"unknown template variant {variant!r}")
    base = render_base(query)
    ordered = sorted(contexts, key=lambda pair: pair[1])
    blocks = []
    for entry, _similarity in ordered:
        if variant == QA_PAIR:
            blocks.append(f"Question: {entry.query_text} Answer: {entry.answer_text} ")
        else:
            blocks.append(f"Context: {declarative_text(entry.query_text, entry.answer_text)} ")
    return "".join(blocks) + base
