"""Feedback-simulation experiments at desk scale.

Builds a synthetic balanced moral-judgment dataset, replays dataset splits as
proxy user interactions (greedy subselection of helpful train entries,
iterative context expansion for uncertain queries), and produces threshold
sweeps and similarity-bucket breakdowns.

Thresholds here default to 0.5: the hash-embedder space is coarser than a
real sentence-embedding space, where 0.875 is the meaningful default.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from itertools import product

from .engine import RetrievalConfig, RevisionEngine, RevisionEntry
from .errors import CorpusParseError, InvalidConfigError, NotFoundError
import numpy as np

from .pipeline import InteractionRecord, answer

DEFAULT_SIM_THRESHOLD = 0.5

POLARITY_ANSWERS = {1: "Yes, it is good.", -1: "No, it is wrong.", 0: "It's okay."}

QUERY_PREFIXES = ("Should I", "Is it okay to", "Can I")
QUERY_SUFFIXES = ("", " today", " sometimes")

# Built-in action table, interleaved good/bad/neutral so any prefix stays
# roughly balanced across the three classes.
_GOOD_ACTIONS = (
    "donate blood at the clinic",
    "help my elderly neighbor with groceries",
    "recycle old newspapers",
    "volunteer at the animal shelter",
    "thank the bus driver",
    "plant trees in the park",
    "return the lost wallet",
    "compliment a coworker's presentation",
    "tutor struggling students for free",
    "forgive my brother after an argument",
)
_BAD_ACTIONS = (
    "lie to my best friend",
    "steal candy from the corner shop",
    "cheat on the final exam",
    "spread rumors about a classmate",
    "litter in the river",
    "mock someone's accent",
    "break a promise for convenience",
    "ignore an injured stranger",
    "vandalize the playground fence",
    "take credit for a teammate's work",
)
_NEUTRAL_ACTIONS = (
    "paint my bedroom walls purple",
    "eat cereal for dinner",
    "wear sandals in winter",
    "skip dessert tonight",
    "listen to jazz while working",
    "rearrange the living room furniture",
    "grow tomatoes on the balcony",
    "ride my bike to the office",
    "watch documentaries all weekend",
    "nap on sunday afternoon",
)

ACTION_TABLE: tuple[tuple[str, int], ...] = tuple(
    pair
    for triple in zip(_GOOD_ACTIONS, _BAD_ACTIONS, _NEUTRAL_ACTIONS)
    for pair in ((triple[0], 1), (triple[1], -1), (triple[2], 0))
)


@dataclass
class LabeledExample:
    query: str
    gold_answer: str
    gold_polarity: int


@dataclass
class SimulationConfig:
    seed: int = 0
    iterations: int = 2
    thresholds: list[float] = field(default_factory=lambda: [0.2, 0.5, 0.8])
    buckets: list[float] = field(default_factory=lambda: [0.8, 0.85, 0.9, 0.95])

    def __post_init__(self):
        if self.iterations < 1:
            raise InvalidConfigError(f"iterations must be >= 1, got {self.iterations}")
        if list(self.thresholds) != sorted(self.thresholds):
            raise InvalidConfigError("thresholds must be ascending")
        if list(self.buckets) != sorted(self.buckets):
            raise InvalidConfigError("buckets must be ascending")


def gen_synthetic_dataset(seed: int = 0, n_actions: int = 30,
                          paraphrases_per_split: int = 3):
    """Build disjoint train/val/test splits of action paraphrases.

    Per action, paraphrases come from the fixed prefix x suffix grid; a seeded
    shuffle partitions them across the three splits, so no query string ever
    appears in two splits.
    """
    if n_actions < 1 or n_actions > len(ACTION_TABLE):
        raise InvalidConfigError(
            f"n_actions must be in [1, {len(ACTION_TABLE)}], got {n_actions}")
    grid = list(product(QUERY_PREFIXES, QUERY_SUFFIXES))
    if paraphrases_per_split < 1 or 3 * paraphrases_per_split > len(grid):
        raise InvalidConfigError(
            f"paraphrases_per_split must be in [1, {len(grid) // 3}], "
            f"got {paraphrases_per_split}")
    rng = random.Random(seed)
    splits: tuple[list[LabeledExample], ...] = ([], [], [])
    for action, polarity in ACTION_TABLE[:n_actions]:
        chosen = rng.sample(grid, 3 * paraphrases_per_split)
        answer_text = POLARITY_ANSWERS[polarity]
        for i, (prefix, suffix) in enumerate(chosen):
            query = f"{prefix} {action}{suffix}?"
            splits[i // paraphrases_per_split].append(
                LabeledExample(query=query, gold_answer=answer_text,
                               gold_polarity=polarity))
    return splits


def build_engine(examples, embedder, source: str = "dataset") -> RevisionEngine:
    engine = RevisionEngine(embedder)
    for ex in examples:
        engine.add_entry(ex.query, ex.gold_answer, ex.gold_polarity, source=source)
    return engine


def run_eval(test, engine: RevisionEngine, generator,
             config: RetrievalConfig) -> list[InteractionRecord]:
    return [answer(ex.query, engine, generator, config) for ex in test]


def select_feedback(train, val, retrieval_cfg: RetrievalConfig, generator,
                    embedder) -> list[LabeledExample]:
    """Keep only train rows that help classify the validation set correctly.

    An engine is filled with the full train split; each val row is answered,
    and when the contextualized prediction matches the val gold, every
    retrieved entry is marked as kept. Rows are returned deduplicated in
    first-marking order.
    """
    engine = build_engine(train, embedder)
    by_query = {ex.query: ex for ex in train}
    by_id = {entry.id: by_query[entry.query_text] for entry in engine.entries()}
    kept: dict[int, LabeledExample] = {}
    for ex in val:
        record = answer(ex.query, engine, generator, retrieval_cfg)
        if record.hits and int(record.predicted_polarity) == int(ex.gold_polarity):
            for hit in record.hits:
                row = by_id[hit.entry_id]
                kept.setdefault(id(row), row)
    return list(kept.values())


def expand_uncertain(queries, pool, engine: RevisionEngine,
                     retrieval_cfg: RetrievalConfig) -> list[RevisionEntry]:
    """Simulated corrective interaction for uncertain queries.

    For each query that previously produced no context, the single most
    similar pool row at or above the threshold is added to the engine
    (deduplicated across queries). Matches the one-context-per-query setting.
    """
    if not pool:
        return []
    pool_embeddings = [engine.embedder(row.query) for row in pool]
    added: list[RevisionEntry] = []
    added_rows: set[int] = set()
    for query in queries:
        q_emb = engine.embedder(query)
        best_idx, best_sim = None, None
        for idx, emb in enumerate(pool_embeddings):
            sim = float(np.dot(emb, q_emb))
            if sim >= retrieval_cfg.t and (best_sim is None or sim > best_sim):
                best_idx, best_sim = idx, sim
        if best_idx is None or id(pool[best_idx]) in added_rows:
            continue
        row = pool[best_idx]
        entry = engine.add_entry(row.query, row.gold_answer, row.gold_polarity,
                                 source="simulation")
        added_rows.add(id(row))
        added.append(entry)
    return added


def _accuracy(records, golds) -> float | None:
    if not records:
        return None
    hits = sum(
        int(r.predicted_polarity) == int(g.gold_polarity)
        for r, g in zip(records, golds)
    )
    return hits / len(records)


def sweep_threshold(test, t_values, engine: RevisionEngine, generator,
                    template: str = "qa_pair", c: int = 1) -> list[dict]:
    """Evaluate the test split at each threshold.

    Accuracy is reported overall and decomposed into the contextualized and
    non-contextualized subsets; the latter always equals the baseline path on
    that subset.
    """
    results = []
    for t in t_values:
        cfg = RetrievalConfig(t=float(t), c=c, template=template)
        records = run_eval(test, engine, generator, cfg)
        with_ctx = [(r, g) for r, g in zip(records, test) if r.hits]
        without_ctx = [(r, g) for r, g in zip(records, test) if not r.hits]
        results.append({
            "t": float(t),
            "n_contextualized": len(with_ctx),
            "accuracy_overall": _accuracy(records, test),
            "accuracy_contextualized": _accuracy(*zip(*with_ctx)) if with_ctx else None,
            "accuracy_noncontextualized": _accuracy(*zip(*without_ctx)) if without_ctx else None,
        })
    return results


SWEEP_COLUMNS = ("t", "n_contextualized", "accuracy_overall",
                 "accuracy_contextualized", "accuracy_noncontextualized")


def sweep_to_csv(rows) -> str:
    """Comma-separated table of sweep results for plotting."""
    lines = [",".join(SWEEP_COLUMNS)]
    for row in rows:
        lines.append(",".join(
            "" if row[col] is None else f"{row[col]:.6g}" for col in SWEEP_COLUMNS))
    return "\n".join(lines) + "\n"


def bucket_by_similarity(records, golds, buckets) -> list[dict]:
    """Cumulative similarity buckets: bucket b covers contextualized records
    whose top-hit similarity is at least b."""
    if list(buckets) != sorted(buckets):
        raise InvalidConfigError("buckets must be ascending")
    contextualized = [(r, g) for r, g in zip(records, golds) if r.hits]
    results = []
    for b in buckets:
        members = [(r, g) for r, g in contextualized if r.hits[0].similarity >= b]
        results.append({
            "bucket": float(b),
            "n": len(members),
            "accuracy": _accuracy(*zip(*members)) if members else None,
        })
    return results


# -- dataset file IO --------------------------------------------------------

def save_dataset(examples, path: str) -> int:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ex in examples:
            fh.write(json.dumps({
                "query": ex.query,
                "answer": ex.gold_answer,
                "polarity": int(ex.gold_polarity),
            }, ensure_ascii=False) + "\n")
    return len(examples)


def load_dataset(path: str) -> list[LabeledExample]:
    try:
        fh = open(path, encoding="utf-8")
    except FileNotFoundError:
        raise NotFoundError(f"dataset not found: {path}") from None
    rows = []
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusParseError(f"invalid JSON: {exc.msg}", lineno) from exc
            query = record.get("query")
            answer_text = record.get("answer")
            polarity = record.get("polarity")
            if not isinstance(query, str) or not query.strip():
                raise CorpusParseError("query must be a non-empty string", lineno)
            if not isinstance(answer_text, str) or not answer_text.strip():
                raise CorpusParseError("answer must be a non-empty string", lineno)
            if polarity not in (-1, 0, 1):
                raise CorpusParseError(f"polarity must be -1|0|1, got {polarity!r}", lineno)
            rows.append(LabeledExample(query=query, gold_answer=answer_text,
                                       gold_polarity=int(polarity)))
    return rows
