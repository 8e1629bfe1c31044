"""Prompt templates for every pipeline stage, plus output parsers.

Templates are plain UTF-8 files with ``{name}`` placeholders, one directory
per domain (``templates/<domain>/<stage>.txt``). Stages whose wording is
domain-independent live only under ``generic/``; lookups fall back there.
Templates are immutable after load and rendering is pure.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .procedures import EmptyParseError, parse_steps

TEMPLATE_ROOT = Path(__file__).parent / "templates"

STAGES = (
    "query-rewrite",
    "summarize",
    "rag-generate",
    "update-response",
    "critic-validate",
    "critic-edit",
    "judge-pairwise",
    "zero-shot",
    "few-shot",
    "react",
)
DOMAINS = ("lcstep", "recipe", "champ", "generic")

NO_UPDATE_SENTINEL = "NO UPDATE REQUIRED"

_PLACEHOLDER = re.compile(r"\{([a-z0-9_]+)\}")


class MissingBindingError(KeyError):
    """Rendering was attempted without a value for some placeholder."""


class MalformedRewriteError(ValueError):
    """Rewrite output had neither a 'steps:' nor a 'queries:' section."""


@dataclass(frozen=True)
class PromptTemplate:
    stage: str
    domain: str
    body: str
    placeholders: frozenset[str] = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self, "placeholders", frozenset(_PLACEHOLDER.findall(self.body))
        )


def get_template(stage: str, domain: str = "generic") -> PromptTemplate:
    if stage not in STAGES:
        raise ValueError(f"unknown stage {stage!r}")
    if domain not in DOMAINS:
        raise ValueError(f"unknown domain {domain!r}")
    for candidate in (domain, "generic"):
        path = TEMPLATE_ROOT / candidate / f"{stage}.txt"
        if path.exists():
            body = path.read_text(encoding="utf-8").rstrip("\n")
            return PromptTemplate(stage=stage, domain=candidate, body=body)
    raise FileNotFoundError(f"no template file for stage {stage!r}")


def render(template: PromptTemplate, bindings: dict[str, str]) -> str:
    """Substitute every placeholder; placeholders in values are left alone."""
    missing = sorted(template.placeholders - set(bindings))
    if missing:
        raise MissingBindingError("{" + missing[0] + "}")
    return _PLACEHOLDER.sub(lambda m: bindings[m.group(1)], template.body)


_SECTION = re.compile(r"^[ \t]*(steps|queries)[ \t]*:", re.IGNORECASE | re.MULTILINE)


def parse_rewrite_output(raw: str, max_queries: int) -> tuple[list[str], list[str]]:
    """Split rewrite output into its outline steps and search queries.

    Sections are introduced by ``steps:`` / ``queries:`` header lines
    (case-insensitive); each section is a bulleted or numbered list. At most
    ``max_queries`` queries are returned; fewer when fewer were emitted.
    """
    matches = list(_SECTION.finditer(raw))
    if not matches:
        raise MalformedRewriteError("no 'steps:' or 'queries:' section found")
    sections: dict[str, str] = {}
    for i, m in enumerate(matches):
        name = m.group(1).lower()
        end = matches[i + 1].start() if i + 1 < len(matches) else len(raw)
        sections.setdefault(name, raw[m.end():end])

    def items(name: str) -> list[str]:
        text = sections.get(name, "")
        if not text.strip():
            return []
        try:
            return parse_steps(text)
        except EmptyParseError:
            return []

    return items("steps"), items("queries")[:max_queries]


@dataclass(frozen=True)
class CriticOutcome:
    """Either the no-edits sentinel or the critic's full edit text."""

    no_update: bool
    edits: str = ""


def parse_critic_output(raw: str) -> CriticOutcome:
    """Sentinel match is a case-sensitive substring test, since models tend
    to decorate the response even when told not to."""
    if NO_UPDATE_SENTINEL in raw:
        return CriticOutcome(no_update=True)
    return CriticOutcome(no_update=False, edits=raw)
