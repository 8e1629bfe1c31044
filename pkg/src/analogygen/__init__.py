"""Procedure generation by analogy over a typed procedural memory."""

from .procedures import (
    Procedure,
    QueryGoal,
    RenderStyle,
    compose,
    parse_steps,
    render_procedure,
    render_steps,
)
from .embeddings import HashingEmbedder, RemoteEmbedder, cosine_similarity
from .memory import MemoryEntry, ProcedureStore, RetrievalResult
from .llm import CallLedger, GenerationRequest, HttpChatProvider, LLMClient, ScriptedProvider
from .pipeline import (
    PipelineConfig,
    RunTrace,
    run_aag,
    run_few_shot,
    run_method,
    run_rag,
    run_react,
    run_variant,
    run_zero_shot,
)
from .evaluation import aggregate, bench, judge_pair, parse_choice

__version__ = "0.1.0"

__all__ = [
    "Procedure",
    "QueryGoal",
    "RenderStyle",
    "compose",
    "parse_steps",
    "render_procedure",
    "render_steps",
    "HashingEmbedder",
    "RemoteEmbedder",
    "cosine_similarity",
    "MemoryEntry",
    "ProcedureStore",
    "RetrievalResult",
    "CallLedger",
    "GenerationRequest",
    "HttpChatProvider",
    "LLMClient",
    "ScriptedProvider",
    "PipelineConfig",
    "RunTrace",
    "run_aag",
    "run_few_shot",
    "run_method",
    "run_rag",
    "run_react",
    "run_variant",
    "run_zero_shot",
    "aggregate",
    "bench",
    "judge_pair",
    "parse_choice",
    "__version__",
]
