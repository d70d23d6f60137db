"""Text-generation backends.

The remote client carries the sampling configuration over the wire; the mock
generators parse prompts by the exact marker strings the prompt module emits,
which makes the whole pipeline testable without any model weights. The echo
generator answers with the last context block's answer, so the revision loop
can be verified exactly.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass

import httpx

from .errors import (
    BackendProtocolError,
    BackendUnavailableError,
    InvalidConfigError,
    PromptParseError,
)
from .embed import tokenize
from .prompt import ANSWER_MARKER, CONTEXT_MARKER, QUESTION_MARKER

BASELINE_ANSWERS = ("Yes, it is good.", "No, it is wrong.", "It's okay.")


@dataclass
class GenerationConfig:
    """Sampling parameters forwarded to a remote generation backend.

    top_k is expressed as a fraction of the vocabulary because vocabulary size
    is backend-specific; the backend resolves the absolute k.
    """

    top_k_fraction: float = 0.10
    temperature: float = 0.1
    max_new_tokens: int = 64

    def __post_init__(self):
        if not 0.0 < self.top_k_fraction <= 1.0:
            raise InvalidConfigError(
                f"top_k_fraction must be in (0, 1], got {self.top_k_fraction}")
        if self.temperature <= 0:
            raise InvalidConfigError(f"temperature must be > 0, got {self.temperature}")
        if not isinstance(self.max_new_tokens, int) or self.max_new_tokens < 1:
            raise InvalidConfigError(
                f"max_new_tokens must be a positive integer, got {self.max_new_tokens}")


class RemoteGenerator:
    """HTTP client for a remote LLM.

    Wire contract: POST ``{"prompt", "top_k_fraction", "temperature",
    "max_new_tokens"}`` -> ``{"text": string}``. No shared mutable state;
    concurrent requests are fine.
    """

    def __init__(self, url: str | None = None,
                 config: GenerationConfig | None = None, timeout: float = 60.0):
        self.url = url or os.environ.get("RIT_GEN_URL")
        if not self.url:
            raise BackendUnavailableError("no generator endpoint configured (RIT_GEN_URL)")
        self.config = config or GenerationConfig()
        self._client = httpx.Client(timeout=timeout)

    def __call__(self, prompt: str) -> str:
        body = {
            "prompt": prompt,
            "top_k_fraction": self.config.top_k_fraction,
            "temperature": self.config.temperature,
            "max_new_tokens": self.config.max_new_tokens,
        }
        try:
            resp = self._client.post(self.url, json=body)
            resp.raise_for_status()
            payload = resp.json()
        except (httpx.TransportError, httpx.HTTPStatusError) as exc:
            raise BackendUnavailableError(str(exc)) from exc
        except ValueError as exc:
            raise BackendProtocolError(f"non-JSON response: {exc}") from exc
        text = payload.get("text")
        if not isinstance(text, str) or not text.strip():
            raise BackendProtocolError("backend returned an empty response")
        return text.strip()


@dataclass(frozen=True)
class ParsedPrompt:
    query: str
    context_text: str | None = None  # full text of the last context block
    context_answer: str | None = None  # answer part (qa_pair) or statement (context_statement)

    @property
    def has_context(self) -> bool:
        return self.context_answer is not None


def parse_prompt(prompt: str) -> ParsedPrompt:
    """Split a rendered prompt into its final question and last context block."""
    if not prompt.endswith(ANSWER_MARKER.rstrip()):
        raise PromptParseError("prompt does not end with the answer marker")
    tail = prompt.rfind(QUESTION_MARKER)
    if tail == -1:
        raise PromptParseError("prompt has no question marker")
    query = prompt[tail + len(QUESTION_MARKER):-len(ANSWER_MARKER)]
    if not query:
        raise PromptParseError("final question block is empty")
    head = prompt[:tail]
    if not head:
        return ParsedPrompt(query=query)
    if head.startswith(CONTEXT_MARKER):
        start = head.rindex(CONTEXT_MARKER) + len(CONTEXT_MARKER)
        statement = head[start:].rstrip(" ")
        return ParsedPrompt(query=query, context_text=statement, context_answer=statement)
    if head.startswith(QUESTION_MARKER):
        marker = ANSWER_MARKER + " "
        answer_at = head.rindex(marker)
        answer = head[answer_at + len(marker):].rstrip(" ")
        question_at = head.rindex(QUESTION_MARKER, 0, answer_at)
        question = head[question_at + len(QUESTION_MARKER):answer_at]
        return ParsedPrompt(query=query, context_text=f"{question} {answer}",
                            context_answer=answer)
    raise PromptParseError("context region starts with no known marker")


def baseline_answer(query: str, seed: int = 0) -> str:
    """Deterministic no-context answer: a seeded hash of the query picks one
    of the three polarity archetypes."""
    key = seed.to_bytes(8, "little", signed=True)
    digest = hashlib.blake2b(query.encode("utf-8"), digest_size=8, key=key).digest()
    return BASELINE_ANSWERS[int.from_bytes(digest, "little") % 3]


def echo_generate(prompt: str, seed: int = 0) -> str:
    """Return the last context block's answer, or a baseline answer when the
    prompt carries no context."""
    parsed = parse_prompt(prompt)
    if parsed.has_context:
        return parsed.context_answer
    return baseline_answer(parsed.query, seed)


def relevance_aware_generate(prompt: str, overlap_threshold: float = 0.3,
                             seed: int = 0) -> str:
    """Echo behavior, but the context is ignored when its token overlap with
    the final question is below the threshold (emulates a generator that
    judges context relevance itself)."""
    if not 0.0 <= overlap_threshold <= 1.0:
        raise InvalidConfigError(
            f"overlap_threshold must be in [0, 1], got {overlap_threshold}")
    parsed = parse_prompt(prompt)
    if not parsed.has_context:
        return baseline_answer(parsed.query, seed)
    context_tokens = set(tokenize(parsed.context_text))
    question_tokens = set(tokenize(parsed.query))
    union = context_tokens | question_tokens
    overlap = len(context_tokens & question_tokens) / len(union) if union else 0.0
    if overlap >= overlap_threshold:
        return parsed.context_answer
    return baseline_answer(parsed.query, seed)
