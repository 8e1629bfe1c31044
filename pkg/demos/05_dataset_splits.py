"""Dataset adapters: three corpora mapped onto procedures, split three ways.

Each adapter emits memory / validation / test slices with disjoint record
ids. The tutorial-style corpus splits by length (the longest records become
the test set, so retrieval has to stretch from simpler analogs); the recipe
and math corpora split by seeded shuffle.

Run:
    python demos/05_dataset_splits.py
"""

import csv
import json
import random
import tempfile
from pathlib import Path

from analogygen.datasets import load_champ, load_lcstep, load_recipes

rng = random.Random(11)
tmp = Path(tempfile.mkdtemp())

# Tutorial-style corpus: JSON lines of {"input", "output", "steps"}.
tutorials = tmp / "tutorials.jsonl"
with tutorials.open("w") as fh:
    for i in range(276):
        steps = [f"step {i}.{j} " + "detail " * rng.randint(0, 7) for j in range(rng.randint(1, 5))]
        fh.write(
            json.dumps(
                {
                    "input": f"library component {i}",
                    "output": f"wire up feature {i}",
                    "steps": [s.strip() for s in steps],
                }
            )
            + "\n"
        )
split = load_lcstep(tutorials)
print(
    f"tutorials: memory={len(split.memory)} validation={len(split.validation)}"
    f" test={len(split.test)}  (longest records go to test)"
)

# Recipe corpus: CSV with JSON-encoded ingredient/direction lists.
recipes = tmp / "recipes.csv"
with recipes.open("w", newline="") as fh:
    writer = csv.DictWriter(fh, fieldnames=["title", "ingredients", "directions"])
    writer.writeheader()
    for i in range(300):
        writer.writerow(
            {
                "title": f"Dish {i}",
                "ingredients": json.dumps([f"item {i}a", f"item {i}b"]),
                "directions": json.dumps([f"prep {i}", f"cook {i}"]),
            }
        )
split = load_recipes(recipes, seed=7)
again = load_recipes(recipes, seed=7)
print(
    f"recipes:   memory={len(split.memory)} validation={len(split.validation)}"
    f" test={len(split.test)}  (same seed, same membership:"
    f" {split.provenance['ids'] == again.provenance['ids']})"
)

# Math corpus: problems with category, hints and a final answer; the answer
# is appended as a closing step so generated solutions state a result.
problems = tmp / "problems.jsonl"
with problems.open("w") as fh:
    for i in range(270):
        fh.write(
            json.dumps(
                {
                    "output": f"Find the closed form of sequence {i}",
                    "category": rng.choice(["sequences", "number theory"]),
                    "hints": [f"look at differences of {i}"],
                    "steps": [f"derive recurrence {i}"],
                    "answer": f"{i}^2",
                }
            )
            + "\n"
        )
split = load_champ(problems, seed=7)
print(
    f"problems:  memory={len(split.memory)} validation={len(split.validation)}"
    f" test={len(split.test)}"
)
print("a problem's last step:", repr(split.test[0].steps[-1]))
