"""Interactive non-parametric model revision.

A frozen text generator is steered by an editable revision corpus: queries
are embedded, similar corpus entries are retrieved above a cosine threshold,
and the retrieved context is prepended to the prompt. Users correct the
system by editing the corpus, not the model.
"""

from .embed import HashEmbedder, RemoteEmbedder, cosine_similarity, hash_embed
from .engine import RetrievalConfig, RetrievalHit, RevisionEngine, RevisionEntry
from .generate import GenerationConfig, RemoteGenerator, echo_generate
from .pipeline import (
    InteractionRecord,
    OutcomeCase,
    Polarity,
    answer,
    apply_feedback,
    classify_polarity,
    resolve_outcome,
)
from .simulate import LabeledExample, SimulationConfig, gen_synthetic_dataset

__all__ = [
    "HashEmbedder",
    "RemoteEmbedder",
    "cosine_similarity",
    "hash_embed",
    "RetrievalConfig",
    "RetrievalHit",
    "RevisionEngine",
    "RevisionEntry",
    "GenerationConfig",
    "RemoteGenerator",
    "echo_generate",
    "InteractionRecord",
    "OutcomeCase",
    "Polarity",
    "answer",
    "apply_feedback",
    "classify_polarity",
    "resolve_outcome",
    "LabeledExample",
    "SimulationConfig",
    "gen_synthetic_dataset",
]

__version__ = "0.1.0"
