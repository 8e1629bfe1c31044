import csv
import json
import random

import pytest

from analogygen.datasets import (
    CorpusFormatError,
    load_champ,
    load_lcstep,
    load_recipes,
    read_procedure_corpus,
    write_procedure_corpus,
)
from analogygen.procedures import Procedure, RenderStyle, render_procedure

from conftest import sample_procedures


def write_lcstep(path, count):
    rng = random.Random(42)
    with path.open("w", encoding="utf-8") as fh:
        for i in range(count):
            steps = [
                f"step {i}-{j} " + "detail " * rng.randint(0, 8)
                for j in range(rng.randint(1, 5))
            ]
            fh.write(
                json.dumps(
                    {
                        "input": f"resource bundle {i}",
                        "output": f"achieve outcome {i}",
                        "steps": [s.strip() for s in steps],
                    }
                )
                + "\n"
            )


def write_recipes(path, count, empty_directions_rows=()):
    rng = random.Random(9)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["title", "ingredients", "directions"])
        writer.writeheader()
        for i in range(count):
            directions = (
                []
                if i in empty_directions_rows
                else [f"step {i}-{j}" for j in range(rng.randint(1, 4))]
            )
            writer.writerow(
                {
                    "title": f"Dish Number {i}",
                    "ingredients": json.dumps([f"item {i}a", f"item {i}b"]),
                    "directions": json.dumps(directions),
                }
            )


def write_champ(path, count, missing_answer_rows=()):
    rng = random.Random(3)
    with path.open("w", encoding="utf-8") as fh:
        for i in range(count):
            record = {
                "output": f"Is the quantity {i} expressible in closed form?",
                "category": rng.choice(["number theory", "combinatorics", "geometry"]),
                "hints": [f"consider parity of {i}", "try small cases"],
                "steps": [f"derive relation {i}", f"simplify expression {i}"],
                "answer": f"{i * 3}",
            }
            if i in missing_answer_rows:
                record.pop("answer")
            fh.write(json.dumps(record) + "\n")


class TestLcstep:
    def test_canonical_counts(self, tmp_path):
        corpus = tmp_path / "c.jsonl"
        write_lcstep(corpus, 276)
        split = load_lcstep(corpus)
        assert (len(split.test), len(split.validation), len(split.memory)) == (56, 27, 193)

    def test_longest_records_in_test(self, tmp_path):
        corpus = tmp_path / "c.jsonl"
        write_lcstep(corpus, 276)
        split = load_lcstep(corpus)

        def length(p):
            return len(render_procedure(p, RenderStyle.EMBEDDING))

        max_memory = max(length(p) for p in split.memory)
        max_val = max(length(p) for p in split.validation)
        assert all(length(p) >= max_memory for p in split.test)
        assert all(length(p) >= max_val for p in split.test)
        assert all(length(p) >= max_memory for p in split.validation)

    def test_proportional_scaling(self, tmp_path):
        corpus = tmp_path / "c.jsonl"
        write_lcstep(corpus, 10)
        split = load_lcstep(corpus)
        assert (len(split.test), len(split.validation), len(split.memory)) == (2, 1, 7)

    def test_malformed_record_reports_line(self, tmp_path):
        corpus = tmp_path / "c.jsonl"
        lines = [
            json.dumps({"input": "a", "output": "b", "steps": ["s"]}),
            "{not json",
        ]
        corpus.write_text("\n".join(lines) + "\n")
        with pytest.raises(CorpusFormatError, match="line 2"):
            load_lcstep(corpus)

    def test_disjoint_and_exhaustive(self, tmp_path):
        corpus = tmp_path / "c.jsonl"
        write_lcstep(corpus, 276)
        split = load_lcstep(corpus)
        memory, val, test = (
            set(split.ids("memory")),
            set(split.ids("validation")),
            set(split.ids("test")),
        )
        assert not memory & val and not memory & test and not val & test
        assert len(memory | val | test) == 276


class TestRecipes:
    def test_title_becomes_output(self, tmp_path):
        corpus = tmp_path / "r.csv"
        write_recipes(corpus, 10)
        split = load_recipes(corpus, seed=1)
        everything = split.memory + split.validation + split.test
        assert all(p.output.startswith("Dish Number ") for p in everything)
        assert all(", " in p.input for p in everything)

    def test_proportional_split(self, tmp_path):
        corpus = tmp_path / "r.csv"
        write_recipes(corpus, 100)
        split = load_recipes(corpus, seed=1)
        assert (len(split.test), len(split.validation), len(split.memory)) == (20, 10, 70)

    def test_seed_determinism(self, tmp_path):
        corpus = tmp_path / "r.csv"
        write_recipes(corpus, 60)
        a = load_recipes(corpus, seed=11)
        b = load_recipes(corpus, seed=11)
        assert a.provenance["ids"] == b.provenance["ids"]
        c = load_recipes(corpus, seed=12)
        assert a.provenance["ids"] != c.provenance["ids"]

    def test_disjoint_membership(self, tmp_path):
        corpus = tmp_path / "r.csv"
        write_recipes(corpus, 60)
        split = load_recipes(corpus, seed=11)
        memory, val, test = (
            set(split.ids("memory")),
            set(split.ids("validation")),
            set(split.ids("test")),
        )
        assert not memory & val and not memory & test and not val & test
        assert len(memory | val | test) == 60

    def test_empty_directions_skipped_and_counted(self, tmp_path):
        corpus = tmp_path / "r.csv"
        write_recipes(corpus, 20, empty_directions_rows={3, 8})
        split = load_recipes(corpus, seed=1)
        total = len(split.memory) + len(split.validation) + len(split.test)
        assert total == 18
        assert split.provenance["skipped"] == 2


class TestChamp:
    def test_answer_appended_as_final_step(self, tmp_path):
        corpus = tmp_path / "m.jsonl"
        write_champ(corpus, 30)
        split = load_champ(corpus, seed=5)
        for p in split.memory + split.validation + split.test:
            assert p.steps[-1].startswith("The answer is")

    def test_canonical_counts(self, tmp_path):
        corpus = tmp_path / "m.jsonl"
        write_champ(corpus, 270)
        split = load_champ(corpus, seed=5)
        assert (len(split.test), len(split.validation), len(split.memory)) == (54, 27, 189)

    def test_seed_determinism(self, tmp_path):
        corpus = tmp_path / "m.jsonl"
        write_champ(corpus, 270)
        a = load_champ(corpus, seed=2)
        b = load_champ(corpus, seed=2)
        assert a.provenance["ids"] == b.provenance["ids"]

    def test_disjoint_membership(self, tmp_path):
        corpus = tmp_path / "m.jsonl"
        write_champ(corpus, 270)
        split = load_champ(corpus, seed=2)
        memory, val, test = (
            set(split.ids("memory")),
            set(split.ids("validation")),
            set(split.ids("test")),
        )
        assert not memory & val and not memory & test and not val & test
        assert len(memory | val | test) == 270

    def test_missing_answer_rejected(self, tmp_path):
        corpus = tmp_path / "m.jsonl"
        write_champ(corpus, 30, missing_answer_rows={4, 9, 14})
        split = load_champ(corpus, seed=0)
        total = len(split.memory) + len(split.validation) + len(split.test)
        assert total == 27
        assert split.provenance["rejected"] == 3

    def test_input_carries_category_and_hints(self, tmp_path):
        corpus = tmp_path / "m.jsonl"
        write_champ(corpus, 10)
        split = load_champ(corpus, seed=0)
        p = (split.memory + split.validation + split.test)[0]
        assert p.input.startswith("Category: ")
        assert "Hints: " in p.input
        assert "; " in p.input


class TestInterchangeCorpus:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        procedures = sample_procedures(5)
        write_procedure_corpus(path, procedures)
        assert read_procedure_corpus(path) == procedures

    def test_malformed_line_reported(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text('{"input": "a", "output": "b", "steps": ["s"]}\nnot json\n')
        with pytest.raises(CorpusFormatError, match="line 2"):
            read_procedure_corpus(path)

    def test_unicode_preserved(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        p = Procedure(input="café au lait", output="pâtisserie", steps=("mélanger",))
        write_procedure_corpus(path, [p])
        assert read_procedure_corpus(path) == [p]
        assert "café" in path.read_text(encoding="utf-8")
