"""End-to-end procedure generation workflows.

The full analogy pipeline runs, in order: a retrieval-grounded draft, query
generation (the goal is decomposed into sub-questions), per-question
retrieval + answer summarization into a Q/A context, a context-driven update
of the draft, and a critic loop that alternates validation and editing until
the critic emits the no-edits sentinel or the cycle budget runs out.

Ablation variants drop individual stages:
  * ``noqg``      rag draft straight into the critic loop
  * ``noag``      per-query retrievals concatenated (deduplicated) instead of
                  summarized answers
  * ``nocr``      stop after the update stage
  * ``noag-nocr`` both of the above

Baselines: ``zero-shot``, ``few-shot`` (seeded random exemplars), ``rag``
(one retrieval, one generation), and ``react`` (a search-tool loop).

One run is strictly sequential and should own a fresh ``LLMClient`` so its
ledger reflects exactly that run. Runs over different samples may execute
concurrently; they share the store read-only and nothing else.
"""

from __future__ import annotations

import random
import re
import time
from dataclasses import dataclass, field

from .llm import CallLedger, GenerationRequest, LLMClient
from .memory import ProcedureStore, procedure_id
from .procedures import (
    EmptyParseError,
    Procedure,
    QueryGoal,
    parse_steps,
    render_procedure,
)
from .prompts import (
    MalformedRewriteError,
    get_template,
    parse_critic_output,
    parse_rewrite_output,
    render,
)

METHODS = ("aag", "zero-shot", "few-shot", "rag", "react")
VARIANTS = ("full", "noqg", "noag", "nocr", "noag-nocr")

REACT_MAX_ITERATIONS = 5

_PARSE_RETRY_SUFFIX = "\n\nOutput only a numbered list of steps."


class PipelineFailedError(RuntimeError):
    """A stage failed unrecoverably; carries the partial run trace."""

    def __init__(self, message: str, trace: "RunTrace"):
        super().__init__(message)
        self.trace = trace


class MalformedActionError(ValueError):
    """A react response contained neither a search nor a final answer."""


class InsufficientExemplarsError(ValueError):
    """Few-shot prompting needs at least as many exemplars as it samples."""


@dataclass
class PipelineConfig:
    k: int = 3
    n: int = 4
    t: int = 3
    temperature: float = 0.7
    variant: str = "full"
    method: str = "aag"
    few_shot_seed: int = 0
    seed: int | None = None
    domain: str = "generic"

    def __post_init__(self):
        if self.k < 1 or self.n < 1 or self.t < 1:
            raise ValueError("k, n and t must all be >= 1")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.method not in METHODS and self.method not in VARIANTS:
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class QAContext:
    """Ordered (question, answer) pairs from the analogy stage."""

    entries: tuple[tuple[str, str], ...]

    def render(self) -> str:
        return "\n\n".join(f"Q: {q}\nA: {a}" for q, a in self.entries)


@dataclass
class StageRecord:
    stage: str
    prompt: str
    response: str


@dataclass
class RetrievalRecord:
    stage: str
    query: str
    k: int
    result_ids: list[str]


@dataclass
class RunTrace:
    method: str
    variant: str
    stages: list[StageRecord] = field(default_factory=list)
    retrievals: list[RetrievalRecord] = field(default_factory=list)
    outline: list[str] = field(default_factory=list)
    queries: list[str] = field(default_factory=list)
    qa_context: QAContext | None = None
    exemplar_ids: list[str] = field(default_factory=list)
    final_text: str = ""
    ledger: CallLedger = field(default_factory=CallLedger)
    duration_s: float = 0.0

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "variant": self.variant,
            "stages": [
                {"stage": s.stage, "prompt": s.prompt, "response": s.response}
                for s in self.stages
            ],
            "retrievals": [
                {"stage": r.stage, "query": r.query, "k": r.k, "result_ids": r.result_ids}
                for r in self.retrievals
            ],
            "outline": self.outline,
            "queries": self.queries,
            "qa_context": list(self.qa_context.entries) if self.qa_context else None,
            "exemplar_ids": self.exemplar_ids,
            "final_text": self.final_text,
            "ledger": self.ledger.snapshot(),
            "duration_s": self.duration_s,
        }


@dataclass
class _Draft:
    """The evolving candidate, with the prompt/stage that produced it so a
    failed final parse can re-prompt the producing stage."""

    text: str
    stage: str
    prompt: str


class _Run:
    def __init__(self, goal: QueryGoal, store, client: LLMClient, cfg: PipelineConfig, trace):
        self.goal = goal
        self.store = store
        self.client = client
        self.cfg = cfg
        self.trace = trace

    def generate(self, prompt: str, stage: str) -> str:
        request = GenerationRequest(
            prompt=prompt, temperature=self.cfg.temperature, seed=self.cfg.seed
        )
        response = self.client.complete(request, stage)
        self.trace.stages.append(StageRecord(stage=stage, prompt=prompt, response=response))
        return response

    def retrieve(self, query: str, stage: str):
        results = self.store.search(query, self.cfg.k)
        self.client.ledger.record_retrieval(stage)
        self.trace.retrievals.append(
            RetrievalRecord(
                stage=stage,
                query=query,
                k=self.cfg.k,
                result_ids=[r.entry.id for r in results],
            )
        )
        return results

    def prompt_for(self, stage: str, **bindings) -> str:
        return render(get_template(stage, self.cfg.domain), bindings)


def _documentation_block(results) -> str:
    return "\n\n".join(render_procedure(r.entry.procedure) for r in results)


def _new_trace(cfg: PipelineConfig, client: LLMClient, method: str) -> RunTrace:
    return RunTrace(method=method, variant=cfg.variant, ledger=client.ledger)


def _finish(run: _Run, draft: _Draft, started: float) -> tuple[Procedure, RunTrace]:
    try:
        steps = parse_steps(draft.text)
    except EmptyParseError:
        retry = run.generate(draft.prompt + _PARSE_RETRY_SUFFIX, draft.stage)
        try:
            steps = parse_steps(retry)
        except EmptyParseError as exc:
            run.trace.duration_s = time.perf_counter() - started
            raise PipelineFailedError(
                f"{draft.stage}: final draft contained no parseable steps", run.trace
            ) from exc
        draft.text = retry
    run.trace.final_text = draft.text
    run.trace.duration_s = time.perf_counter() - started
    procedure = Procedure(
        input=run.goal.resources, output=run.goal.goal, steps=tuple(steps)
    )
    return procedure, run.trace


def _rag_draft(run: _Run) -> _Draft:
    results = run.retrieve(run.goal.as_query(), "rag")
    prompt = run.prompt_for(
        "rag-generate",
        documentation=_documentation_block(results),
        output=run.goal.goal,
        input=run.goal.resources,
    )
    return _Draft(text=run.generate(prompt, "rag"), stage="rag", prompt=prompt)


def _query_generation(run: _Run) -> list[str]:
    prompt = run.prompt_for(
        "query-rewrite",
        n_queries=str(run.cfg.n),
        output=run.goal.goal,
        input=run.goal.resources,
    )
    raw = run.generate(prompt, "query-gen")
    try:
        outline, queries = parse_rewrite_output(raw, run.cfg.n)
    except MalformedRewriteError as exc:
        raise PipelineFailedError(f"query-gen: {exc}", run.trace) from exc
    run.trace.outline = outline
    run.trace.queries = queries
    return queries


def _answer_generation(run: _Run, queries: list[str]) -> QAContext:
    entries = []
    for query in queries:
        results = run.retrieve(query, "answer-gen")
        prompt = run.prompt_for(
            "summarize", question=query, knowledge=_documentation_block(results)
        )
        entries.append((query, run.generate(prompt, "answer-gen")))
    context = QAContext(entries=tuple(entries))
    run.trace.qa_context = context
    return context


def _retrieval_concat(run: _Run, queries: list[str]) -> str:
    """The no-answer-generator context: every retrieved procedure, in query
    order then rank order, with exact duplicates across queries removed."""
    seen: set[tuple] = set()
    blocks: list[str] = []
    for query in queries:
        for result in run.retrieve(query, "answer-gen"):
            proc = result.entry.procedure
            key = (proc.input, proc.output, proc.steps)
            if key not in seen:
                seen.add(key)
                blocks.append(render_procedure(proc))
    return "\n\n".join(blocks)


def _update_response(run: _Run, context_block: str, draft: _Draft) -> _Draft:
    prompt = run.prompt_for(
        "update-response",
        knowledge=context_block,
        steps=draft.text,
        output=run.goal.goal,
        input=run.goal.resources,
    )
    return _Draft(text=run.generate(prompt, "update"), stage="update", prompt=prompt)


def _critic_loop(run: _Run, draft: _Draft, context_block: str | None) -> _Draft:
    """Up to ``t`` cycles of validate-then-edit; a cycle with the no-edits
    sentinel halts the loop without an edit call."""
    for _ in range(run.cfg.t):
        critic_prompt = run.prompt_for(
            "critic-validate",
            output=run.goal.goal,
            input=run.goal.resources,
            steps=draft.text,
        )
        outcome = parse_critic_output(run.generate(critic_prompt, "critic"))
        if outcome.no_update:
            break
        if context_block is None:
            knowledge = outcome.edits
        else:
            knowledge = f"{outcome.edits}\n\n{context_block}"
        edit_prompt = run.prompt_for(
            "critic-edit",
            knowledge=knowledge,
            steps=draft.text,
            output=run.goal.goal,
            input=run.goal.resources,
        )
        draft = _Draft(text=run.generate(edit_prompt, "edit"), stage="edit", prompt=edit_prompt)
    return draft


def run_rag(goal: QueryGoal, store: ProcedureStore, client: LLMClient, cfg: PipelineConfig):
    """One retrieval on the canonical query, one grounded generation."""
    started = time.perf_counter()
    trace = _new_trace(cfg, client, "rag")
    run = _Run(goal, store, client, cfg, trace)
    return _finish(run, _rag_draft(run), started)


def _run_analogy(goal, store, client, cfg, method_label) -> tuple[Procedure, RunTrace]:
    started = time.perf_counter()
    trace = _new_trace(cfg, client, method_label)
    run = _Run(goal, store, client, cfg, trace)

    has_query_gen = cfg.variant != "noqg"
    has_answer_gen = cfg.variant in ("full", "nocr")
    has_critic = cfg.variant in ("full", "noqg", "noag")

    draft = _rag_draft(run)
    context_block: str | None = None
    if has_query_gen:
        queries = _query_generation(run)
        if has_answer_gen:
            context_block = _answer_generation(run, queries).render()
        else:
            context_block = _retrieval_concat(run, queries)
        draft = _update_response(run, context_block, draft)
    if has_critic:
        draft = _critic_loop(run, draft, context_block)
    return _finish(run, draft, started)


def run_aag(goal: QueryGoal, store: ProcedureStore, client: LLMClient, cfg: PipelineConfig):
    """The full workflow; requires ``cfg.variant == "full"``."""
    if cfg.variant != "full":
        raise ValueError(f"run_aag requires variant 'full', got {cfg.variant!r}")
    return _run_analogy(goal, store, client, cfg, "aag")


def run_variant(goal: QueryGoal, store: ProcedureStore, client: LLMClient, cfg: PipelineConfig):
    """One of the ablation variants (noqg, noag, nocr, noag-nocr)."""
    if cfg.variant == "full":
        raise ValueError("run_variant expects an ablation variant, not 'full'")
    return _run_analogy(goal, store, client, cfg, cfg.variant)


def run_zero_shot(goal: QueryGoal, client: LLMClient, cfg: PipelineConfig):
    started = time.perf_counter()
    trace = _new_trace(cfg, client, "zero-shot")
    run = _Run(goal, None, client, cfg, trace)
    prompt = run.prompt_for("zero-shot", output=goal.goal, input=goal.resources)
    draft = _Draft(text=run.generate(prompt, "zero-shot"), stage="zero-shot", prompt=prompt)
    return _finish(run, draft, started)


def run_few_shot(goal: QueryGoal, training, client: LLMClient, cfg: PipelineConfig):
    """Seeded uniform sample (without replacement) of ``k`` exemplars from
    the training procedures; no store searches."""
    started = time.perf_counter()
    training = list(training)
    if len(training) < cfg.k:
        raise InsufficientExemplarsError(
            f"need at least {cfg.k} training procedures, got {len(training)}"
        )
    trace = _new_trace(cfg, client, "few-shot")
    run = _Run(goal, None, client, cfg, trace)
    exemplars = random.Random(cfg.few_shot_seed).sample(training, cfg.k)
    trace.exemplar_ids = [procedure_id(p) for p in exemplars]
    prompt = run.prompt_for(
        "few-shot",
        documentation="\n\n".join(render_procedure(p) for p in exemplars),
        output=goal.goal,
        input=goal.resources,
    )
    draft = _Draft(text=run.generate(prompt, "few-shot"), stage="few-shot", prompt=prompt)
    return _finish(run, draft, started)


_REACT_FINAL = re.compile(r"final answer\s*:", re.IGNORECASE)
_REACT_SEARCH = re.compile(r"^\s*search\s*:\s*(.+)$", re.IGNORECASE | re.MULTILINE)

_REACT_RETRY_SUFFIX = (
    "\n\nYour last response was not understood. Respond with either"
    " 'Search: <query>' or 'Final Answer:' followed by numbered steps."
)
_REACT_FORCE_SUFFIX = (
    "\n\nYou have no searches left. Respond now with 'Final Answer:'"
    " followed by the numbered steps."
)


def _parse_react_action(raw: str) -> tuple[str, str] | None:
    final = _REACT_FINAL.search(raw)
    if final:
        return "final", raw[final.end():]
    search = _REACT_SEARCH.search(raw)
    if search:
        return "search", search.group(1).strip()
    return None


def run_react(goal: QueryGoal, store: ProcedureStore, client: LLMClient, cfg: PipelineConfig):
    """Tool loop: the model either searches the store or answers. Capped at
    five actions, after which a final answer is forced."""
    started = time.perf_counter()
    trace = _new_trace(cfg, client, "react")
    run = _Run(goal, store, client, cfg, trace)

    transcript = ""
    draft: _Draft | None = None
    for _ in range(REACT_MAX_ITERATIONS):
        prompt = run.prompt_for(
            "react", output=goal.goal, input=goal.resources, transcript=transcript
        )
        raw = run.generate(prompt, "react")
        action = _parse_react_action(raw)
        if action is None:
            raw = run.generate(prompt + _REACT_RETRY_SUFFIX, "react")
            action = _parse_react_action(raw)
            if action is None:
                trace.duration_s = time.perf_counter() - started
                raise PipelineFailedError(
                    "react: response contained neither a search nor a final answer",
                    trace,
                ) from MalformedActionError(raw[:200])
        kind, content = action
        if kind == "final":
            draft = _Draft(text=content, stage="react", prompt=prompt)
            break
        results = run.retrieve(content, "react")
        transcript += f"\nSearch: {content}\nObservation:\n{_documentation_block(results)}\n"
    if draft is None:
        prompt = (
            run.prompt_for(
                "react", output=goal.goal, input=goal.resources, transcript=transcript
            )
            + _REACT_FORCE_SUFFIX
        )
        raw = run.generate(prompt, "react")
        action = _parse_react_action(raw)
        text = action[1] if action and action[0] == "final" else raw
        draft = _Draft(text=text, stage="react", prompt=prompt)
    return _finish(run, draft, started)


def run_method(
    goal: QueryGoal,
    cfg: PipelineConfig,
    store: ProcedureStore | None = None,
    client: LLMClient | None = None,
    training=None,
):
    """Dispatch on ``cfg.method``; ablation variant names are accepted as
    method names for convenience."""
    if client is None:
        raise ValueError("an LLMClient is required")
    method = cfg.method
    if method in VARIANTS and method != "full":
        cfg = PipelineConfig(**{**cfg.__dict__, "method": "aag", "variant": method})
        method = "aag"
    if method == "aag":
        if cfg.variant == "full":
            return run_aag(goal, store, client, cfg)
        return run_variant(goal, store, client, cfg)
    if method == "rag":
        return run_rag(goal, store, client, cfg)
    if method == "zero-shot":
        return run_zero_shot(goal, client, cfg)
    if method == "few-shot":
        if training is None:
            training = [e.procedure for e in store.entries()] if store else []
        return run_few_shot(goal, training, client, cfg)
    if method == "react":
        return run_react(goal, store, client, cfg)
    raise ValueError(f"unknown method {method!r}")
