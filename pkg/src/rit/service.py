"""HTTP service exposing the revision loop under /v1.

Handlers are deliberately thin: every response field comes from one pipeline
or engine call. The service runs either against remote backends (RIT_EMBED_URL
and RIT_GEN_URL) or fully self-contained with the hash embedder and the echo
generator (mock mode). No authentication; single process, single corpus.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import metrics, pipeline, simulate
from .embed import HashEmbedder, RemoteEmbedder
from .engine import RetrievalConfig, RevisionEngine
from .errors import (
    BackendProtocolError,
    BackendUnavailableError,
    CorpusParseError,
    EmptyTextError,
    InvalidConfigError,
    NotFoundError,
    RitError,
)
from .generate import GenerationConfig, RemoteGenerator, echo_generate


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    corpus_path: str | None = None
    backend_mode: str = "mock"  # "mock" or "remote"
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    generation: GenerationConfig = field(default_factory=GenerationConfig)
    embed_url: str | None = None
    gen_url: str | None = None
    hash_dim: int = 64
    hash_seed: int = 0

    @classmethod
    def from_env(cls, **overrides) -> "ServiceConfig":
        defaults = {
            "corpus_path": os.environ.get("RIT_CORPUS_PATH"),
            "embed_url": os.environ.get("RIT_EMBED_URL"),
            "gen_url": os.environ.get("RIT_GEN_URL"),
        }
        defaults.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**defaults)


class ServiceState:
    """Engine, backends, and mutable defaults behind the endpoints."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        if config.backend_mode == "mock":
            self.embedder = HashEmbedder(config.hash_dim, config.hash_seed)
            self.generator = echo_generate
        elif config.backend_mode == "remote":
            self.embedder = RemoteEmbedder(config.embed_url)
            self.generator = RemoteGenerator(config.gen_url, config.generation)
        else:
            raise InvalidConfigError(f"unknown backend mode {config.backend_mode!r}")
        self.engine = RevisionEngine(self.embedder)
        if config.corpus_path and os.path.exists(config.corpus_path):
            self.engine.load_corpus(config.corpus_path)
        self.eval_lock = threading.Lock()


def _error(status: int, error: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": error, "detail": detail})


def _context_payload(state: ServiceState, record: pipeline.InteractionRecord) -> list[dict]:
    contexts = []
    for hit in record.hits:
        entry = state.engine.get(hit.entry_id)
        contexts.append({
            "id": entry.id,
            "similarity": hit.similarity,
            "query": entry.query_text,
            "answer": entry.answer_text,
            "polarity": entry.polarity,
        })
    return contexts


def _entry_payload(entry) -> dict:
    return {
        "id": entry.id,
        "query": entry.query_text,
        "answer": entry.answer_text,
        "polarity": entry.polarity,
        "source": entry.source,
        "created_at": entry.created_at,
    }


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="revision service")
    app.state.service = state
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )

    @app.exception_handler(RitError)
    async def _rit_error(request: Request, exc: RitError):
        if isinstance(exc, (BackendUnavailableError, BackendProtocolError)):
            return _error(502, "backend_failure", str(exc))
        if isinstance(exc, NotFoundError):
            return _error(404, "not_found", str(exc))
        if isinstance(exc, CorpusParseError):
            return _error(422, "invalid_dataset", str(exc))
        if isinstance(exc, EmptyTextError):
            return _error(422, "empty_text", str(exc))
        return _error(400, "invalid_request", str(exc))

    @app.get("/v1/health")
    async def health():
        return {"status": "ok", "backend_mode": state.config.backend_mode,
                "corpus_count": state.engine.stats()["count"]}

    @app.post("/v1/query")
    async def query(request: Request):
        body = await _json_body(request)
        if isinstance(body, JSONResponse):
            return body
        text = body.get("text")
        if not isinstance(text, str) or not text.strip():
            return _error(422, "empty_text", "body must carry a non-empty 'text'")
        try:
            cfg = _merged_retrieval_config(state, body)
        except (InvalidConfigError, TypeError) as exc:
            return _error(400, "invalid_request", str(exc))
        record = pipeline.answer(text, state.engine, state.generator, cfg)
        return {
            "answer": record.generated_answer,
            "polarity": int(record.predicted_polarity),
            "low_confidence": record.low_confidence_polarity,
            "uncertain": record.outcome is pipeline.OutcomeCase.UNCERTAIN_NO_CONTEXT,
            "contexts": _context_payload(state, record),
            "prompt": record.prompt,
        }

    @app.post("/v1/feedback")
    async def feedback(request: Request):
        body = await _json_body(request)
        if isinstance(body, JSONResponse):
            return body
        query_text = body.get("query")
        answer_text = body.get("answer")
        polarity = body.get("polarity")
        if not isinstance(query_text, str) or not query_text.strip():
            return _error(400, "invalid_request", "'query' must be a non-empty string")
        if not isinstance(answer_text, str) or not answer_text.strip():
            return _error(400, "invalid_request", "'answer' must be a non-empty string")
        if polarity not in (-1, 0, 1):
            return _error(400, "invalid_request",
                          f"'polarity' must be -1, 0, or 1, got {polarity!r}")
        entry, created = state.engine.upsert(query_text, answer_text, int(polarity),
                                             source="user")
        return {"id": entry.id, "created": created}

    @app.get("/v1/corpus")
    async def corpus_list(offset: int = 0, limit: int = 50, search: str | None = None):
        if offset < 0 or limit < 1:
            return _error(400, "invalid_request",
                          "offset must be >= 0 and limit must be >= 1")
        entries = state.engine.entries(search=search)
        return {
            "items": [_entry_payload(e) for e in entries[offset:offset + limit]],
            "total": len(entries),
        }

    @app.patch("/v1/corpus/{entry_id}")
    async def corpus_patch(entry_id: str, request: Request):
        body = await _json_body(request)
        if isinstance(body, JSONResponse):
            return body
        fields = {}
        if "query" in body:
            fields["query_text"] = body["query"]
        if "answer" in body:
            fields["answer_text"] = body["answer"]
        if "polarity" in body:
            if body["polarity"] not in (-1, 0, 1):
                return _error(400, "invalid_request",
                              f"'polarity' must be -1, 0, or 1, got {body['polarity']!r}")
            fields["polarity"] = int(body["polarity"])
        entry = state.engine.update_entry(entry_id, **fields)
        return _entry_payload(entry)

    @app.delete("/v1/corpus/{entry_id}")
    async def corpus_delete(entry_id: str):
        if not state.engine.remove_entry(entry_id):
            return _error(404, "not_found", f"no entry with id {entry_id!r}")
        return {"removed": True}

    @app.post("/v1/evaluate")
    async def evaluate(request: Request):
        body = await _json_body(request)
        if isinstance(body, JSONResponse):
            return body
        if not state.eval_lock.acquire(blocking=False):
            return _error(409, "conflict", "an evaluation is already running")
        try:
            if "path" in body:
                examples = simulate.load_dataset(body["path"])
            else:
                rows = body.get("examples")
                if not isinstance(rows, list) or not rows:
                    return _error(422, "invalid_dataset",
                                  "body must carry 'path' or a non-empty 'examples' list")
                examples = []
                for i, row in enumerate(rows):
                    if (not isinstance(row, dict)
                            or not isinstance(row.get("query"), str)
                            or not row.get("query", "").strip()
                            or not isinstance(row.get("answer"), str)
                            or not row.get("answer", "").strip()
                            or row.get("polarity") not in (-1, 0, 1)):
                        return _error(422, "invalid_dataset", f"malformed row at index {i}")
                    examples.append(simulate.LabeledExample(
                        query=row["query"], gold_answer=row["answer"],
                        gold_polarity=int(row["polarity"])))
            try:
                cfg = _merged_retrieval_config(state, body)
            except (InvalidConfigError, TypeError) as exc:
                return _error(400, "invalid_request", str(exc))
            records = simulate.run_eval(examples, state.engine, state.generator, cfg)
            report = metrics.evaluate(records, examples, state.embedder,
                                      feedback_count=state.engine.stats()["count"])
            return {
                "feedback": report.feedback_count,
                "bleu1": report.bleu1,
                "bleu3": report.bleu3,
                "rougeL": report.rouge_l,
                "meteor": report.meteor,
                "acc": report.polarity_acc,
                "acc_binary": report.polarity_acc_binary,
                "embed_sim": report.embed_sim,
                "n_total": report.n_total,
                "n_contextualized": report.n_contextualized,
                "negative_question_flags": report.negative_question_flags,
            }
        finally:
            state.eval_lock.release()

    @app.get("/v1/config")
    async def config_get():
        return _config_payload(state)

    @app.patch("/v1/config")
    async def config_patch(request: Request):
        body = await _json_body(request)
        if isinstance(body, JSONResponse):
            return body
        try:
            state.config.retrieval = _merged_retrieval_config(state, body)
        except (InvalidConfigError, TypeError, ValueError) as exc:
            return _error(400, "invalid_request", str(exc))
        return _config_payload(state)

    return app


def _config_payload(state: ServiceState) -> dict:
    cfg = state.config
    return {
        "t": cfg.retrieval.t,
        "c": cfg.retrieval.c,
        "template": cfg.retrieval.template,
        "backend_mode": cfg.backend_mode,
        "top_k_fraction": cfg.generation.top_k_fraction,
        "temperature": cfg.generation.temperature,
        "max_new_tokens": cfg.generation.max_new_tokens,
    }


def _merged_retrieval_config(state: ServiceState, body: dict) -> RetrievalConfig:
    current = state.config.retrieval
    t = float(body.get("t", current.t))
    if not -1.0 <= t <= 1.0:
        raise InvalidConfigError(f"threshold t must be in [-1, 1], got {t}")
    return RetrievalConfig(
        t=t,
        c=int(body.get("c", current.c)),
        template=body.get("template", current.template),
    )


async def _json_body(request: Request):
    try:
        body = await request.json()
    except Exception:
        return _error(400, "invalid_request", "body is not valid JSON")
    if not isinstance(body, dict):
        return _error(400, "invalid_request", "body must be a JSON object")
    return body


def build_app(config: ServiceConfig | None = None) -> FastAPI:
    return create_app(ServiceState(config or ServiceConfig.from_env()))
