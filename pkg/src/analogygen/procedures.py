"""Procedure records: an input, a goal, and an ordered list of steps.

A procedure is the unit of storage, generation, and evaluation everywhere in
this package. Procedures compose end-to-end when one's output matches the
next's input, and render deterministically to text for embedding and for
prompt construction.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum


class MismatchedInterfaceError(ValueError):
    """Composition was attempted between procedures whose ends don't meet."""


class EmptyParseError(ValueError):
    """No list items could be extracted from a block of text."""


@dataclass(frozen=True)
class Procedure:
    """An (input, output, steps) record.

    ``input`` names the available resources, ``output`` the goal, and
    ``steps`` the ordered actions that get from one to the other. Step order
    is significant and preserved byte-for-byte through storage round-trips.
    """

    input: str
    output: str
    steps: tuple[str, ...]

    def __post_init__(self):
        if not self.input.strip():
            raise ValueError("procedure input must be non-blank")
        if not self.output.strip():
            raise ValueError("procedure output must be non-blank")
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps:
            raise ValueError("procedure must have at least one step")
        for i, step in enumerate(self.steps):
            if not step.strip():
                raise ValueError(f"step {i + 1} is blank")


@dataclass(frozen=True)
class QueryGoal:
    """A user request: the goal to reach and the resources available."""

    goal: str
    resources: str

    def __post_init__(self):
        if not self.goal.strip():
            raise ValueError("goal must be non-blank")
        if not self.resources.strip():
            raise ValueError("resources must be non-blank")

    def as_query(self) -> str:
        """Canonical search-query form: ``<goal> using <resources>``."""
        return f"{self.goal} using {self.resources}"


class RenderStyle(Enum):
    """Text layouts for a procedure.

    DOCUMENTATION is the layout used when stuffing retrieved procedures into
    prompts; EMBEDDING is the joint all-fields text handed to the embedder
    (lexically aligned with the canonical query form).
    """

    DOCUMENTATION = "documentation"
    EMBEDDING = "embedding"


def render_steps(steps) -> str:
    """Number steps as ``1. ...`` lines, one per step."""
    return "\n".join(f"{i}. {step}" for i, step in enumerate(steps, start=1))


def render_procedure(p: Procedure, style: RenderStyle = RenderStyle.DOCUMENTATION) -> str:
    if style is RenderStyle.DOCUMENTATION:
        return f"DOCUMENTATION '{p.output}' using {p.input}:\n\n{render_steps(p.steps)}"
    return f"{p.output} using {p.input}\n{render_steps(p.steps)}"


def compose(p: Procedure, q: Procedure) -> Procedure:
    """Chain two procedures where ``p`` produces what ``q`` consumes.

    The interface check is trimmed exact text equality. The result runs from
    p's input to q's output with the step lists concatenated.
    """
    if p.output.strip() != q.input.strip():
        raise MismatchedInterfaceError(
            f"cannot compose: {p.output!r} does not match {q.input!r}"
        )
    return Procedure(input=p.input, output=q.output, steps=p.steps + q.steps)


_NUMBERED = re.compile(r"^(\s*)(\d+)[.)]\s*(.*)$")
_BULLETED = re.compile(r"^(\s*)[-*•]\s+(.*)$")


def parse_steps(raw: str) -> list[str]:
    """Extract ordered list items from model output.

    Accepts numbered (``1.``, ``2)``) and bulleted (``-``, ``*``, ``•``)
    markers. Indented lines without a marker continue the previous item.
    Items that are blank after marker stripping are dropped. Unindented
    lines without a marker (preamble, section headers) are ignored.
    """
    items: list[str] = []
    open_item = False
    for line in raw.splitlines():
        m = _NUMBERED.match(line) or _BULLETED.match(line)
        if m:
            items.append(m.group(m.lastindex).strip())
            open_item = True
        elif open_item and line[:1].isspace() and line.strip():
            items[-1] = f"{items[-1]} {line.strip()}".strip()
        else:
            open_item = False
    items = [item for item in items if item]
    if not items:
        raise EmptyParseError("no list items found")
    return items
