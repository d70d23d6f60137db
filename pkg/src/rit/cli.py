"""Command-line interface for batch workflows.

Env vars RIT_EMBED_URL, RIT_GEN_URL, and RIT_CORPUS_PATH are honored as
defaults; flags take precedence. Exit codes: 0 success, 1 runtime failure,
2 usage error (click's convention).
"""

from __future__ import annotations

import os
import sys

import click

from . import metrics, pipeline, simulate
from .embed import HashEmbedder, RemoteEmbedder
from .engine import RetrievalConfig, RevisionEngine
from .errors import RitError
from .generate import GenerationConfig, RemoteGenerator, echo_generate


def _backends(mode: str, embed_url: str | None, gen_url: str | None):
    if mode == "mock":
        return HashEmbedder(), echo_generate
    return RemoteEmbedder(embed_url), RemoteGenerator(gen_url, GenerationConfig())


def _engine(embedder, corpus: str | None) -> RevisionEngine:
    engine = RevisionEngine(embedder)
    path = corpus or os.environ.get("RIT_CORPUS_PATH")
    if path and os.path.exists(path):
        engine.load_corpus(path)
    return engine


def _corpus_path(corpus: str | None) -> str:
    path = corpus or os.environ.get("RIT_CORPUS_PATH")
    if not path:
        raise click.UsageError("no corpus path: pass --corpus or set RIT_CORPUS_PATH")
    return path


backend_options = [
    click.option("--mode", type=click.Choice(["mock", "remote"]), default="mock",
                 show_default=True, help="Backend mode."),
    click.option("--embed-url", default=None, help="Embedding service URL "
                 "(default: RIT_EMBED_URL)."),
    click.option("--gen-url", default=None, help="Generation service URL "
                 "(default: RIT_GEN_URL)."),
    click.option("--corpus", default=None, help="Corpus file "
                 "(default: RIT_CORPUS_PATH)."),
]

retrieval_options = [
    click.option("-t", "--threshold", type=float, default=None,
                 help="Similarity threshold (default: 0.875 remote, 0.5 mock)."),
    click.option("-c", "--contexts", type=int, default=1, show_default=True,
                 help="Max contexts per query."),
    click.option("--template", type=click.Choice(["qa_pair", "context_statement"]),
                 default="qa_pair", show_default=True),
]


def add_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


def _retrieval_config(threshold, contexts, template, mode) -> RetrievalConfig:
    if threshold is None:
        threshold = simulate.DEFAULT_SIM_THRESHOLD if mode == "mock" else 0.875
    return RetrievalConfig(t=threshold, c=contexts, template=template)


@click.group()
def main():
    """Interactive model revision: retrieval-contextualized generation with an
    editable corpus."""


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@add_options(backend_options)
def serve(host, port, mode, embed_url, gen_url, corpus):
    """Run the HTTP service."""
    import uvicorn

    from .service import ServiceConfig, ServiceState, create_app

    config = ServiceConfig.from_env(
        host=host, port=port, backend_mode=mode,
        embed_url=embed_url, gen_url=gen_url, corpus_path=corpus,
    )
    app = create_app(ServiceState(config))
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command("gen-synthetic")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n-actions", type=int, default=30, show_default=True)
@click.option("--per-split", type=int, default=3, show_default=True)
@click.option("--out-dir", type=click.Path(), default=".", show_default=True)
def gen_synthetic(seed, n_actions, per_split, out_dir):
    """Generate synthetic train/val/test dataset files."""
    train, val, test = simulate.gen_synthetic_dataset(seed, n_actions, per_split)
    os.makedirs(out_dir, exist_ok=True)
    for name, split in (("train", train), ("val", val), ("test", test)):
        path = os.path.join(out_dir, f"{name}.jsonl")
        simulate.save_dataset(split, path)
        click.echo(f"{name}: {len(split)} examples -> {path}")


@main.command()
@click.argument("dataset", type=click.Path(exists=True))
@click.option("--as-corpus", is_flag=True, default=False,
              help="Fill the corpus with the dataset rows and save it.")
@add_options(backend_options)
def ingest(dataset, as_corpus, mode, embed_url, gen_url, corpus):
    """Load a dataset file into the revision corpus."""
    if not as_corpus:
        raise click.UsageError("only --as-corpus ingestion is supported")
    path = _corpus_path(corpus)
    embedder, _ = _backends(mode, embed_url, gen_url)
    engine = _engine(embedder, corpus)
    for row in simulate.load_dataset(dataset):
        engine.add_entry(row.query, row.gold_answer, row.gold_polarity, source="dataset")
    count = engine.save_corpus(path)
    click.echo(f"corpus: {count} entries -> {path}")


@main.command()
@click.argument("text")
@add_options(backend_options)
@add_options(retrieval_options)
def query(text, mode, embed_url, gen_url, corpus, threshold, contexts, template):
    """Answer a single query and show the retrieval trace."""
    embedder, generator = _backends(mode, embed_url, gen_url)
    engine = _engine(embedder, corpus)
    cfg = _retrieval_config(threshold, contexts, template, mode)
    record = pipeline.answer(text, engine, generator, cfg)
    if record.outcome is pipeline.OutcomeCase.UNCERTAIN_NO_CONTEXT:
        click.echo("[uncertain] no context found at this threshold")
    for hit in record.hits:
        entry = engine.get(hit.entry_id)
        click.echo(f"context {hit.rank}: sim={hit.similarity:.4f} {entry.query_text!r}"
                   f" -> {entry.answer_text!r}")
    click.echo(f"answer: {record.generated_answer}")
    click.echo(f"polarity: {int(record.predicted_polarity):+d}"
               + (" (low confidence)" if record.low_confidence_polarity else ""))


@main.command("eval")
@click.argument("dataset", type=click.Path(exists=True))
@add_options(backend_options)
@add_options(retrieval_options)
def eval_cmd(dataset, mode, embed_url, gen_url, corpus, threshold, contexts, template):
    """Evaluate a dataset against the current corpus; print the report line."""
    embedder, generator = _backends(mode, embed_url, gen_url)
    engine = _engine(embedder, corpus)
    cfg = _retrieval_config(threshold, contexts, template, mode)
    examples = simulate.load_dataset(dataset)
    records = simulate.run_eval(examples, engine, generator, cfg)
    report = metrics.evaluate(records, examples, embedder,
                              feedback_count=engine.stats()["count"])
    click.echo(report.to_line())


@main.group("simulate")
def simulate_group():
    """Feedback-simulation experiments."""


@simulate_group.command("select")
@click.argument("train_file", type=click.Path(exists=True))
@click.argument("val_file", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), required=True,
              help="Where to write the kept subset (dataset format).")
@add_options(backend_options)
@add_options(retrieval_options)
def simulate_select(train_file, val_file, out, mode, embed_url, gen_url, corpus,
                    threshold, contexts, template):
    """Greedy subselection: keep train rows that classify the val set correctly."""
    embedder, generator = _backends(mode, embed_url, gen_url)
    cfg = _retrieval_config(threshold, contexts, template, mode)
    train = simulate.load_dataset(train_file)
    val = simulate.load_dataset(val_file)
    kept = simulate.select_feedback(train, val, cfg, generator, embedder)
    simulate.save_dataset(kept, out)
    click.echo(f"kept {len(kept)} of {len(train)} train rows -> {out}")


@simulate_group.command("expand")
@click.argument("test_file", type=click.Path(exists=True))
@click.argument("pool_file", type=click.Path(exists=True))
@add_options(backend_options)
@add_options(retrieval_options)
def simulate_expand(test_file, pool_file, mode, embed_url, gen_url, corpus,
                    threshold, contexts, template):
    """Add pool contexts for test queries that came back uncertain."""
    path = _corpus_path(corpus)
    embedder, generator = _backends(mode, embed_url, gen_url)
    engine = _engine(embedder, corpus)
    cfg = _retrieval_config(threshold, contexts, template, mode)
    test = simulate.load_dataset(test_file)
    pool = simulate.load_dataset(pool_file)
    records = simulate.run_eval(test, engine, generator, cfg)
    uncertain = [r.query for r in records
                 if r.outcome is pipeline.OutcomeCase.UNCERTAIN_NO_CONTEXT]
    added = simulate.expand_uncertain(uncertain, pool, engine, cfg)
    engine.save_corpus(path)
    click.echo(f"{len(uncertain)} uncertain queries, {len(added)} contexts added"
               f" -> {path}")


@main.command()
@click.argument("dataset", type=click.Path(exists=True))
@click.option("--t-list", required=True,
              help="Comma-separated ascending thresholds, e.g. 0.2,0.5,0.8.")
@add_options(backend_options)
@click.option("-c", "--contexts", type=int, default=1, show_default=True)
@click.option("--template", type=click.Choice(["qa_pair", "context_statement"]),
              default="qa_pair", show_default=True)
def sweep(dataset, t_list, mode, embed_url, gen_url, corpus, contexts, template):
    """Threshold sweep over a dataset; prints a CSV table."""
    try:
        t_values = [float(x) for x in t_list.split(",") if x.strip()]
    except ValueError as exc:
        raise click.UsageError(f"bad --t-list: {exc}")
    if not t_values or t_values != sorted(t_values):
        raise click.UsageError("--t-list must be a non-empty ascending list")
    embedder, generator = _backends(mode, embed_url, gen_url)
    engine = _engine(embedder, corpus)
    test = simulate.load_dataset(dataset)
    rows = simulate.sweep_threshold(test, t_values, engine, generator,
                                    template=template, c=contexts)
    click.echo(simulate.sweep_to_csv(rows), nl=False)


def run(argv=None) -> int:
    """Programmatic entry point returning the exit code."""
    try:
        main.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 2
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        return 1
    except RitError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1


if __name__ == "__main__":
    sys.exit(run())
