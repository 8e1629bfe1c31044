"""Corpus adapters: map raw corpora onto procedures and reproduce splits.

All adapters emit a three-way split (memory / validation / test) with
disjoint membership, tracked by per-record ids in the provenance block.
Given the same file and seed, a loader always returns the same split.

The interchange corpus format is JSON lines, one object per procedure:
``{"input": str, "output": str, "steps": [str, ...]}`` in UTF-8.
"""

from __future__ import annotations

import csv
import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path

from .procedures import Procedure, RenderStyle, render_procedure

logger = logging.getLogger(__name__)

LCSTEP_CANONICAL = (276, 56, 27)   # corpus, test, validation
CHAMP_CANONICAL = (270, 54, 27)
RECIPES_SUBSET = 10_000
RECIPES_TEST_FRACTION = 0.2
RECIPES_VAL_FRACTION = 0.1


class CorpusFormatError(ValueError):
    """A corpus record could not be mapped onto a procedure."""


@dataclass
class DatasetSplit:
    memory: list[Procedure]
    validation: list[Procedure]
    test: list[Procedure]
    provenance: dict

    def ids(self, part: str) -> list[str]:
        return list(self.provenance["ids"][part])


def read_procedure_corpus(path) -> list[Procedure]:
    """Read interchange-format JSON lines; line numbers appear in errors."""
    procedures = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                procedures.append(
                    Procedure(
                        input=record["input"],
                        output=record["output"],
                        steps=tuple(record["steps"]),
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CorpusFormatError(f"line {lineno}: {exc}") from exc
    return procedures


def write_procedure_corpus(path, procedures) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for p in procedures:
            fh.write(
                json.dumps(
                    {"input": p.input, "output": p.output, "steps": list(p.steps)},
                    ensure_ascii=False,
                )
                + "\n"
            )


def _split_shape(total: int, canonical: tuple[int, int, int]) -> tuple[int, int]:
    """Test/validation counts; canonical sizes reproduce the exact counts,
    anything else scales proportionally (with a warning)."""
    corpus, test, val = canonical
    if total == corpus:
        return test, val
    logger.warning(
        "corpus has %d records, expected %d; scaling split proportionally", total, corpus
    )
    return round(total * test / corpus), round(total * val / corpus)


def _provenance(dataset: str, ids: dict[str, list[str]], **extra) -> dict:
    counts = {part: len(v) for part, v in ids.items()}
    return {"dataset": dataset, "ids": ids, "counts": counts, **extra}


def load_lcstep(path) -> DatasetSplit:
    """Split by length: the longest records become the test set.

    Records are sorted by ascending rendered-text length (ties: step count,
    then id); the longest 56 are test, the preceding 27 validation, and the
    rest populate the memory store (193 of the canonical 276).
    """
    records = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                proc = Procedure(
                    input=obj["input"], output=obj["output"], steps=tuple(obj["steps"])
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CorpusFormatError(f"line {lineno}: {exc}") from exc
            records.append((f"lcstep-{lineno:05d}", proc))

    n_test, n_val = _split_shape(len(records), LCSTEP_CANONICAL)
    records.sort(
        key=lambda item: (
            len(render_procedure(item[1], RenderStyle.EMBEDDING)),
            len(item[1].steps),
            item[0],
        )
    )
    n_memory = len(records) - n_test - n_val
    memory = records[:n_memory]
    validation = records[n_memory : n_memory + n_val]
    test = records[n_memory + n_val :]
    ids = {
        "memory": [rid for rid, _ in memory],
        "validation": [rid for rid, _ in validation],
        "test": [rid for rid, _ in test],
    }
    return DatasetSplit(
        memory=[p for _, p in memory],
        validation=[p for _, p in validation],
        test=[p for _, p in test],
        provenance=_provenance("lcstep", ids, seed=None),
    )


def load_recipes(path, seed: int) -> DatasetSplit:
    """Recipes: title becomes the output, ingredients the input, directions
    the steps. A seeded shuffle picks a subset of up to 10000 records split
    20% test / 10% validation / 70% memory. Records with no usable
    directions are skipped and counted.
    """
    kept = []
    skipped = 0
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for rowno, row in enumerate(reader, start=1):
            try:
                title = row["title"]
                ingredients = json.loads(row["ingredients"])
                directions = json.loads(row["directions"])
            except (KeyError, TypeError, json.JSONDecodeError) as exc:
                raise CorpusFormatError(f"row {rowno}: {exc}") from exc
            directions = [d for d in directions if str(d).strip()]
            if not directions or not str(title).strip() or not ingredients:
                skipped += 1
                continue
            proc = Procedure(
                input=", ".join(str(i) for i in ingredients),
                output=str(title),
                steps=tuple(str(d) for d in directions),
            )
            kept.append((f"recipes-{rowno:06d}", proc))

    rng = random.Random(seed)
    rng.shuffle(kept)
    subset = kept[:RECIPES_SUBSET]
    n_test = round(len(subset) * RECIPES_TEST_FRACTION)
    n_val = round(len(subset) * RECIPES_VAL_FRACTION)
    test = subset[:n_test]
    validation = subset[n_test : n_test + n_val]
    memory = subset[n_test + n_val :]
    ids = {
        "memory": [rid for rid, _ in memory],
        "validation": [rid for rid, _ in validation],
        "test": [rid for rid, _ in test],
    }
    return DatasetSplit(
        memory=[p for _, p in memory],
        validation=[p for _, p in validation],
        test=[p for _, p in test],
        provenance=_provenance("recipes", ids, seed=seed, skipped=skipped),
    )


def _champ_input(category: str, hints) -> str:
    if isinstance(hints, str):
        hints = [hints] if hints.strip() else []
    joined = "; ".join(str(h) for h in hints if str(h).strip())
    if joined:
        return f"Category: {category}. Hints: {joined}"
    return f"Category: {category}"


def load_champ(path, seed: int) -> DatasetSplit:
    """Math problems: the problem statement becomes the output, category and
    hints the input, and the solution steps (plus a closing  "The answer is
    <answer>" step) the steps. Seeded shuffle, 54 test / 27 validation / the
    rest memory at the canonical 270 records; missing-answer records are
    rejected and counted.
    """
    kept = []
    rejected = 0
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"line {lineno}: {exc}") from exc
            answer = obj.get("answer")
            if answer is None or not str(answer).strip():
                rejected += 1
                continue
            try:
                steps = [s for s in obj.get("steps", []) if str(s).strip()]
                steps.append(f"The answer is {answer}")
                proc = Procedure(
                    input=_champ_input(obj["category"], obj.get("hints", [])),
                    output=obj["output"],
                    steps=tuple(steps),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise CorpusFormatError(f"line {lineno}: {exc}") from exc
            kept.append((f"champ-{lineno:05d}", proc))

    n_test, n_val = _split_shape(len(kept), CHAMP_CANONICAL)
    rng = random.Random(seed)
    rng.shuffle(kept)
    test = kept[:n_test]
    validation = kept[n_test : n_test + n_val]
    memory = kept[n_test + n_val :]
    ids = {
        "memory": [rid for rid, _ in memory],
        "validation": [rid for rid, _ in validation],
        "test": [rid for rid, _ in test],
    }
    return DatasetSplit(
        memory=[p for _, p in memory],
        validation=[p for _, p in validation],
        test=[p for _, p in test],
        provenance=_provenance("champ", ids, seed=seed, rejected=rejected),
    )
