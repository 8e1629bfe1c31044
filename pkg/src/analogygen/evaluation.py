"""Pairwise judging with order debiasing, plus aggregate and cost reporting.

Each sample is judged by ten generation calls at temperature 0.7: five with
procedure A in the first slot and five with B first, one fixed seed per
call. Every response is parsed for a ``[[1]]``/``[[2]]`` choice (the last
occurrence wins), the choice is mapped back through that call's ordering,
and the sample outcome is the strict majority of non-abstaining votes; equal
counts are a tie. A sample where most calls abstain is flagged and tied.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass

from .llm import GenerationRequest, LLMClient, NonRetryableError, TransportError
from .pipeline import PipelineFailedError
from .procedures import Procedure, QueryGoal, render_steps
from .prompts import get_template, render

A_WINS = "a_wins"
B_WINS = "b_wins"
TIE = "tie"

A_FIRST = "a-first"
B_FIRST = "b-first"

ABSTAIN = "abstain"

DEFAULT_JUDGE_SEEDS = tuple(range(1, 11))
JUDGE_TEMPERATURE = 0.7

_CHOICE = re.compile(r"\[\[([12])\]\]")


@dataclass(frozen=True)
class RawChoice:
    seed: int
    ordering: str
    choice: str  # "1", "2" or "abstain"


@dataclass
class JudgeVerdict:
    sample_id: str
    raw_choices: list[RawChoice]
    outcome: str
    flagged: bool = False

    def to_dict(self) -> dict:
        return {
            "sample_id": self.sample_id,
            "outcome": self.outcome,
            "flagged": self.flagged,
            "raw_choices": [
                {"seed": c.seed, "ordering": c.ordering, "choice": c.choice}
                for c in self.raw_choices
            ],
        }


def parse_choice(raw: str) -> str:
    """The last ``[[1]]``/``[[2]]`` in the text, or abstain."""
    matches = _CHOICE.findall(raw)
    return matches[-1] if matches else ABSTAIN


def _resolve(choices: list[RawChoice]) -> tuple[str, bool]:
    a_votes = b_votes = abstains = 0
    for c in choices:
        if c.choice == ABSTAIN:
            abstains += 1
            continue
        slot1_is_a = c.ordering == A_FIRST
        picked_slot1 = c.choice == "1"
        if picked_slot1 == slot1_is_a:
            a_votes += 1
        else:
            b_votes += 1
    if abstains > len(choices) / 2:
        return TIE, True
    if a_votes > b_votes:
        return A_WINS, False
    if b_votes > a_votes:
        return B_WINS, False
    return TIE, False


def judge_pair(
    goal: QueryGoal,
    proc_a: Procedure,
    proc_b: Procedure,
    client: LLMClient,
    seeds=DEFAULT_JUDGE_SEEDS,
    sample_id: str = "",
    domain: str = "generic",
) -> JudgeVerdict:
    """Run the order-balanced judging protocol for one sample.

    The first half of ``seeds`` places A first, the second half places B
    first. A call that fails transport after retries abstains rather than
    aborting the sample.
    """
    seeds = list(seeds)
    if len(seeds) < 2 or len(seeds) % 2:
        raise ValueError("the judge needs an even number of seeds (two orderings)")
    template = get_template("judge-pairwise", domain)
    half = len(seeds) // 2
    choices: list[RawChoice] = []
    for position, seed in enumerate(seeds):
        ordering = A_FIRST if position < half else B_FIRST
        first, second = (proc_a, proc_b) if ordering == A_FIRST else (proc_b, proc_a)
        prompt = render(
            template,
            {
                "output": goal.goal,
                "input": goal.resources,
                "proc1_steps": render_steps(first.steps),
                "proc2_steps": render_steps(second.steps),
            },
        )
        request = GenerationRequest(prompt=prompt, temperature=JUDGE_TEMPERATURE, seed=seed)
        try:
            raw = client.complete(request, "judge")
            choice = parse_choice(raw)
        except (TransportError, NonRetryableError):
            choice = ABSTAIN
        choices.append(RawChoice(seed=seed, ordering=ordering, choice=choice))
    outcome, flagged = _resolve(choices)
    return JudgeVerdict(
        sample_id=sample_id, raw_choices=choices, outcome=outcome, flagged=flagged
    )


@dataclass
class EvalReport:
    method_a: str
    method_b: str
    sample_count: int
    win_pct: float
    loss_pct: float
    tie_pct: float
    verdicts: list[JudgeVerdict]

    def to_dict(self) -> dict:
        return {
            "method_a": self.method_a,
            "method_b": self.method_b,
            "sample_count": self.sample_count,
            "win_pct": self.win_pct,
            "loss_pct": self.loss_pct,
            "tie_pct": self.tie_pct,
            "verdicts": [v.to_dict() for v in self.verdicts],
        }


def aggregate(verdicts, method_a: str = "a", method_b: str = "b") -> EvalReport:
    """Outcome percentages over all samples, two decimal places."""
    verdicts = list(verdicts)
    if not verdicts:
        raise ValueError("need at least one verdict")
    n = len(verdicts)
    wins = sum(1 for v in verdicts if v.outcome == A_WINS)
    losses = sum(1 for v in verdicts if v.outcome == B_WINS)
    ties = n - wins - losses
    return EvalReport(
        method_a=method_a,
        method_b=method_b,
        sample_count=n,
        win_pct=round(100.0 * wins / n, 2),
        loss_pct=round(100.0 * losses / n, 2),
        tie_pct=round(100.0 * ties / n, 2),
        verdicts=verdicts,
    )


def format_table(reports) -> str:
    """Plain-text win/loss/tie table, one row per comparison."""
    header = f"{'comparison':<28} {'win %':>8} {'loss %':>8} {'tie %':>8} {'n':>5}"
    lines = [header, "-" * len(header)]
    for r in reports:
        label = f"{r.method_a} vs {r.method_b}"
        lines.append(
            f"{label:<28} {r.win_pct:>8.2f} {r.loss_pct:>8.2f} {r.tie_pct:>8.2f}"
            f" {r.sample_count:>5}"
        )
    return "\n".join(lines)


@dataclass
class BenchReport:
    method: str
    samples: int
    failures: int
    mean_duration_s: float
    mean_generations: float
    mean_retrievals: float

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "samples": self.samples,
            "failures": self.failures,
            "mean_duration_s": self.mean_duration_s,
            "mean_generations": self.mean_generations,
            "mean_retrievals": self.mean_retrievals,
        }


def bench(method: str, goals, run) -> BenchReport:
    """Time ``run`` over the goals and average the call ledgers.

    ``run`` maps a goal to ``(procedure, trace)`` and should build a fresh
    client per call so ledgers stay isolated. Failed samples are counted and
    excluded from the means.
    """
    durations: list[float] = []
    generations: list[int] = []
    retrievals: list[int] = []
    failures = 0
    for goal in goals:
        started = time.perf_counter()
        try:
            _, trace = run(goal)
        except (PipelineFailedError, TransportError, NonRetryableError):
            failures += 1
            continue
        elapsed = time.perf_counter() - started
        durations.append(trace.duration_s or elapsed)
        generations.append(trace.ledger.generation_calls)
        retrievals.append(trace.ledger.retrieval_searches)
    done = len(durations)
    return BenchReport(
        method=method,
        samples=done,
        failures=failures,
        mean_duration_s=sum(durations) / done if done else 0.0,
        mean_generations=sum(generations) / done if done else 0.0,
        mean_retrievals=sum(retrievals) / done if done else 0.0,
    )
