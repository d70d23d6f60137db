"""Sentence embedding backends and cosine similarity.

All vectors produced here are unit-normalized float64 numpy arrays, so
downstream similarity is a plain dot product.
"""

from __future__ import annotations

import hashlib
import os
import re
from dataclasses import dataclass, field

import httpx
import numpy as np

from .errors import (
    BackendProtocolError,
    BackendUnavailableError,
    CorpusParseError,
    EmptyTextError,
    InvalidDimError,
    DimMismatchError,
    NotFoundError,
)

UNIT_NORM_TOL = 1e-9

_TOKEN_RE = re.compile(r"[a-z0-9']+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric character except apostrophes."""
    return _TOKEN_RE.findall(text.lower())


def unit_normalize(values) -> np.ndarray:
    vec = np.asarray(values, dtype=np.float64)
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return vec / norm


def _token_digest(token: str, seed: int) -> bytes:
    key = seed.to_bytes(8, "little", signed=True)
    return hashlib.blake2b(token.encode("utf-8"), digest_size=9, key=key).digest()


def hash_embed(text: str, dim: int = 64, seed: int = 0) -> np.ndarray:
    """Deterministic signed bag-of-buckets embedding (test stand-in for a real S-LLM).

    Each token is hashed to a bucket in [0, dim) and a sign in {-1, +1};
    signed counts are accumulated and L2-normalized.
    """
    if not isinstance(dim, int) or dim < 1:
        raise InvalidDimError(f"dim must be a positive integer, got {dim!r}")
    tokens = tokenize(text)
    if not tokens:
        raise EmptyTextError("text has no tokens after normalization")
    vec = np.zeros(dim, dtype=np.float64)
    for token in tokens:
        digest = _token_digest(token, seed)
        bucket = int.from_bytes(digest[:8], "little") % dim
        sign = 1.0 if digest[8] % 2 == 0 else -1.0
        vec[bucket] += sign
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        # Signed counts cancelled exactly; fall back to unsigned counts so the
        # result stays deterministic and non-degenerate.
        for token in tokens:
            digest = _token_digest(token, seed)
            vec[int.from_bytes(digest[:8], "little") % dim] += 1.0
        norm = float(np.linalg.norm(vec))
    return vec / norm


def cosine_similarity(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimMismatchError(f"dimension mismatch: {a.shape} vs {b.shape}")
    denom = float(np.linalg.norm(a)) * float(np.linalg.norm(b))
    if denom == 0.0:
        raise ValueError("cosine similarity of a zero vector is undefined")
    return float(np.clip(np.dot(a, b) / denom, -1.0, 1.0))


class HashEmbedder:
    """Callable embedder wrapping :func:`hash_embed` with fixed dim and seed."""

    def __init__(self, dim: int = 64, seed: int = 0):
        if not isinstance(dim, int) or dim < 1:
            raise InvalidDimError(f"dim must be a positive integer, got {dim!r}")
        self.dim = dim
        self.seed = seed

    def __call__(self, text: str) -> np.ndarray:
        return hash_embed(text, self.dim, self.seed)

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        return [self(t) for t in texts]


class RemoteEmbedder:
    """HTTP client for a sentence-embedding service.

    Wire contract: POST ``{"texts": [...]}`` -> ``{"embeddings": [[...], ...], "dim": n}``.
    Vectors are re-normalized locally if the service returns non-unit vectors.
    Stateless apart from the connection pool; safe for concurrent batches.
    """

    def __init__(self, url: str | None = None, timeout: float = 30.0):
        self.url = url or os.environ.get("RIT_EMBED_URL")
        if not self.url:
            raise BackendUnavailableError("no embedder endpoint configured (RIT_EMBED_URL)")
        self._client = httpx.Client(timeout=timeout)

    def embed_batch(self, texts: list[str]) -> list[np.ndarray]:
        if not texts:
            raise ValueError("empty batch")
        if any(not t or not t.strip() for t in texts):
            raise EmptyTextError("batch contains empty text")
        try:
            resp = self._client.post(self.url, json={"texts": texts})
            resp.raise_for_status()
            payload = resp.json()
        except (httpx.TransportError, httpx.HTTPStatusError) as exc:
            raise BackendUnavailableError(str(exc)) from exc
        except ValueError as exc:
            raise BackendProtocolError(f"non-JSON response: {exc}") from exc
        embeddings = payload.get("embeddings")
        if not isinstance(embeddings, list) or len(embeddings) != len(texts):
            raise BackendProtocolError("embedding count does not match batch size")
        dims = {len(e) for e in embeddings}
        if len(dims) != 1:
            raise BackendProtocolError(f"inconsistent dimensions in batch: {sorted(dims)}")
        declared = payload.get("dim")
        if declared is not None and declared != dims.pop():
            raise BackendProtocolError("declared dim does not match vectors")
        try:
            return [unit_normalize(e) for e in embeddings]
        except ValueError as exc:
            raise BackendProtocolError(str(exc)) from exc

    def __call__(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]


@dataclass
class EmbeddingTable:
    """Precomputed text -> vector table loaded from disk."""

    vectors: dict[str, np.ndarray] = field(default_factory=dict)
    duplicates: int = 0

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, text: str) -> bool:
        return text in self.vectors

    def __call__(self, text: str) -> np.ndarray:
        try:
            return self.vectors[text]
        except KeyError:
            raise NotFoundError(f"no precomputed embedding for {text!r}") from None


def load_precomputed(path: str) -> EmbeddingTable:
    """Load an embedding table: one ``text<TAB>f1,f2,...`` record per line.

    Duplicate keys keep the last entry and bump the duplicate counter.
    """
    if not os.path.exists(path):
        raise NotFoundError(f"embedding table not found: {path}")
    table = EmbeddingTable()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            text, sep, raw = line.partition("\t")
            if not sep or not text:
                raise CorpusParseError("expected 'text<TAB>floats'", lineno)
            try:
                values = [float(x) for x in raw.split(",")]
                vec = unit_normalize(values)
            except ValueError as exc:
                raise CorpusParseError(str(exc), lineno) from exc
            if text in table.vectors:
                table.duplicates += 1
            table.vectors[text] = vec
    return table
