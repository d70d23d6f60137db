"""The revision engine: an editable corpus with exact threshold retrieval.

Retrieval scans every active entry, keeps similarities >= t, sorts by
similarity descending with ties broken by ascending id, and truncates to c.
The threshold comparison is inclusive so t=1.0 still matches exact duplicates.

Concurrency: many readers or one writer. All public methods take an RLock so
a retrieval observes either the pre- or post-mutation corpus, never a partial
state.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass

import numpy as np

from .embed import UNIT_NORM_TOL
from .errors import (
    CorpusParseError,
    DimMismatchError,
    EmptyTextError,
    InvalidConfigError,
    NotFoundError,
)

SOURCES = ("user", "dataset", "simulation")
TEMPLATES = ("qa_pair", "context_statement")


@dataclass
class RevisionEntry:
    id: str
    query_text: str
    answer_text: str
    polarity: int
    embedding: np.ndarray
    source: str = "user"
    active: bool = True
    created_at: int = 0


@dataclass
class RetrievalConfig:
    """Hyperparameters of the retrieval step: threshold t, context count c, template variant."""

    t: float = 0.875
    c: int = 1
    template: str = "qa_pair"

    def __post_init__(self):
        # t > 1 is allowed as a degenerate "retrieve nothing" setting so
        # threshold sweeps can include the baseline-equivalent point.
        if self.t < -1.0:
            raise InvalidConfigError(f"threshold t must be >= -1, got {self.t}")
        if not isinstance(self.c, int) or self.c < 1:
            raise InvalidConfigError(f"context count c must be a positive integer, got {self.c}")
        if self.template not in TEMPLATES:
            raise InvalidConfigError(f"unknown template {self.template!r}")


@dataclass(frozen=True)
class RetrievalHit:
    entry_id: str
    similarity: float
    rank: int


def _normalize_query(text: str) -> str:
    return " ".join(text.lower().split())


def _validate_polarity(polarity: int) -> int:
    if polarity not in (-1, 0, 1):
        raise InvalidConfigError(f"polarity must be -1, 0, or 1, got {polarity!r}")
    return int(polarity)


class RevisionEngine:
    """Mutable corpus of :class:`RevisionEntry` items plus exact cosine retrieval."""

    def __init__(self, embedder):
        self.embedder = embedder
        self._entries: dict[str, RevisionEntry] = {}
        self._by_query: dict[str, str] = {}  # normalized query_text -> id (active only)
        self._counter = 0
        self._lock = threading.RLock()

    # -- mutation -----------------------------------------------------------

    def upsert(self, query_text: str, answer_text: str, polarity: int, source: str = "user"):
        """Insert a new entry or overwrite answer/polarity of the active entry
        with the same normalized query_text. Returns (entry, created)."""
        if not query_text or not query_text.strip():
            raise EmptyTextError("query_text is empty")
        if not answer_text or not answer_text.strip():
            raise EmptyTextError("answer_text is empty")
        polarity = _validate_polarity(polarity)
        if source not in SOURCES:
            raise InvalidConfigError(f"unknown source {source!r}")
        embedding = self.embedder(query_text)
        key = _normalize_query(query_text)
        with self._lock:
            existing_id = self._by_query.get(key)
            if existing_id is not None:
                entry = self._entries[existing_id]
                entry.answer_text = answer_text
                entry.polarity = polarity
                return entry, False
            self._counter += 1
            entry = RevisionEntry(
                id=f"e{self._counter:06d}",
                query_text=query_text,
                answer_text=answer_text,
                polarity=polarity,
                embedding=embedding,
                source=source,
                active=True,
                created_at=int(time.time()),
            )
            self._entries[entry.id] = entry
            self._by_query[key] = entry.id
            return entry, True

    def add_entry(self, query_text: str, answer_text: str, polarity: int,
                  source: str = "user") -> RevisionEntry:
        entry, _ = self.upsert(query_text, answer_text, polarity, source)
        return entry

    def remove_entry(self, entry_id: str) -> bool:
        """Soft-delete; idempotent. Hard deletion happens on save."""
        with self._lock:
            entry = self._entries.get(entry_id)
            if entry is None or not entry.active:
                return False
            entry.active = False
            key = _normalize_query(entry.query_text)
            if self._by_query.get(key) == entry_id:
                del self._by_query[key]
            return True

    def update_entry(self, entry_id: str, *, query_text: str | None = None,
                     answer_text: str | None = None,
                     polarity: int | None = None) -> RevisionEntry:
        with self._lock:
            entry = self._entries.get(entry_id)
            if entry is None or not entry.active:
                raise NotFoundError(f"no entry with id {entry_id!r}")
            if query_text is not None and query_text != entry.query_text:
                if not query_text.strip():
                    raise EmptyTextError("query_text is empty")
                new_embedding = self.embedder(query_text)
                old_key = _normalize_query(entry.query_text)
                if self._by_query.get(old_key) == entry_id:
                    del self._by_query[old_key]
                entry.query_text = query_text
                entry.embedding = new_embedding
                self._by_query[_normalize_query(query_text)] = entry_id
            if answer_text is not None:
                if not answer_text.strip():
                    raise EmptyTextError("answer_text is empty")
                entry.answer_text = answer_text
            if polarity is not None:
                entry.polarity = _validate_polarity(polarity)
            return entry

    # -- lookup -------------------------------------------------------------

    def get(self, entry_id: str) -> RevisionEntry:
        with self._lock:
            entry = self._entries.get(entry_id)
            if entry is None or not entry.active:
                raise NotFoundError(f"no entry with id {entry_id!r}")
            return entry

    def entries(self, search: str | None = None) -> list[RevisionEntry]:
        """Active entries in id order, optionally filtered by substring on query_text."""
        with self._lock:
            items = [e for e in self._entries.values() if e.active]
        if search:
            needle = search.lower()
            items = [e for e in items if needle in e.query_text.lower()]
        return sorted(items, key=lambda e: e.id)

    def retrieve(self, query_embedding, config: RetrievalConfig) -> list[RetrievalHit]:
        query_embedding = np.asarray(query_embedding, dtype=np.float64)
        with self._lock:
            active = [e for e in self._entries.values() if e.active]
            if not active:
                return []
            dim = active[0].embedding.shape[0]
            if query_embedding.shape != (dim,):
                raise DimMismatchError(
                    f"query dim {query_embedding.shape} vs corpus dim ({dim},)")
            scored = [
                (float(np.dot(e.embedding, query_embedding)), e.id)
                for e in active
            ]
        kept = [(sim, eid) for sim, eid in scored if sim >= config.t]
        kept.sort(key=lambda p: (-p[0], p[1]))
        return [
            RetrievalHit(entry_id=eid, similarity=sim, rank=rank)
            for rank, (sim, eid) in enumerate(kept[:config.c], start=1)
        ]

    def stats(self) -> dict:
        with self._lock:
            active = [e for e in self._entries.values() if e.active]
            polarity_histogram = {-1: 0, 0: 0, 1: 0}
            source_histogram = {s: 0 for s in SOURCES}
            for e in active:
                polarity_histogram[e.polarity] += 1
                source_histogram[e.source] += 1
            return {
                "count": len(active),
                "dim": active[0].embedding.shape[0] if active else None,
                "polarity_histogram": polarity_histogram,
                "source_histogram": source_histogram,
            }

    # -- persistence --------------------------------------------------------

    def save_corpus(self, path: str) -> int:
        """Write active entries as JSON lines. Soft-deleted entries are dropped."""
        with self._lock:
            active = self.entries()
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                for e in active:
                    record = {
                        "id": e.id,
                        "query": e.query_text,
                        "answer": e.answer_text,
                        "polarity": e.polarity,
                        "embedding": e.embedding.tolist(),
                        "source": e.source,
                        "active": True,
                        "created_at": e.created_at,
                    }
                    fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            return len(active)

    def load_corpus(self, path: str) -> int:
        """Replace the corpus wholesale with the file's contents (all-or-nothing)."""
        if not isinstance(path, str) or not path:
            raise NotFoundError("no corpus path given")
        try:
            fh = open(path, encoding="utf-8")
        except FileNotFoundError:
            raise NotFoundError(f"corpus file not found: {path}") from None
        loaded: list[RevisionEntry] = []
        with fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise CorpusParseError(f"invalid JSON: {exc.msg}", lineno) from exc
                loaded.append(self._entry_from_record(record, lineno))
        with self._lock:
            self._entries = {e.id: e for e in loaded}
            self._by_query = {
                _normalize_query(e.query_text): e.id for e in loaded if e.active
            }
            numeric = [int(e.id[1:]) for e in loaded if e.id[:1] == "e" and e.id[1:].isdigit()]
            self._counter = max(numeric, default=0)
            return len(loaded)

    def _entry_from_record(self, record: dict, lineno: int) -> RevisionEntry:
        if not isinstance(record, dict):
            raise CorpusParseError("record is not an object", lineno)
        try:
            entry_id = record["id"]
            query = record["query"]
            answer = record["answer"]
            polarity = record["polarity"]
        except KeyError as exc:
            raise CorpusParseError(f"missing key {exc.args[0]!r}", lineno) from exc
        if not isinstance(entry_id, str) or not entry_id:
            raise CorpusParseError("id must be a non-empty string", lineno)
        if not isinstance(query, str) or not query.strip():
            raise CorpusParseError("query must be a non-empty string", lineno)
        if not isinstance(answer, str) or not answer.strip():
            raise CorpusParseError("answer must be a non-empty string", lineno)
        if polarity not in (-1, 0, 1):
            raise CorpusParseError(f"polarity must be -1|0|1, got {polarity!r}", lineno)
        raw_embedding = record.get("embedding")
        if raw_embedding is None:
            embedding = self.embedder(query)
        else:
            try:
                embedding = np.asarray(raw_embedding, dtype=np.float64)
            except (TypeError, ValueError) as exc:
                raise CorpusParseError(f"bad embedding: {exc}", lineno) from exc
            if embedding.ndim != 1 or embedding.shape[0] < 1:
                raise CorpusParseError("embedding must be a flat non-empty array", lineno)
            if abs(float(np.linalg.norm(embedding)) - 1.0) > UNIT_NORM_TOL:
                raise CorpusParseError("embedding is not unit-normalized", lineno)
        source = record.get("source", "dataset")
        if source not in SOURCES:
            raise CorpusParseError(f"unknown source {source!r}", lineno)
        return RevisionEntry(
            id=entry_id,
            query_text=query,
            answer_text=answer,
            polarity=int(polarity),
            embedding=embedding,
            source=source,
            active=bool(record.get("active", True)),
            created_at=int(record.get("created_at", 0)),
        )
