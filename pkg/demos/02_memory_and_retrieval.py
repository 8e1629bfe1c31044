"""The procedural memory: embed whole procedures, search by cosine top-k.

Run:
    python demos/02_memory_and_retrieval.py
"""

import tempfile
from pathlib import Path

from analogygen import HashingEmbedder, Procedure, ProcedureStore

RECIPES = [
    Procedure(
        input="tuna steaks, sesame seeds, soy sauce",
        output="sesame-crusted tuna",
        steps=("press sesame seeds onto the tuna", "sear one minute per side"),
    ),
    Procedure(
        input="ground beef, onion, celery, potatoes",
        output="autumn soup",
        steps=("brown the beef with onion and celery", "simmer with potatoes"),
    ),
    Procedure(
        input="flour, yeast, water, salt",
        output="a loaf of bread",
        steps=("knead the dough", "let it rise", "bake at 230C"),
    ),
    Procedure(
        input="tuna, mayonnaise, bread",
        output="a tuna sandwich",
        steps=("mix tuna with mayonnaise", "spread between slices"),
    ),
]

# The hashing embedder is deterministic and offline: token-level feature
# hashing, L2-normalized. Retrieval quality is crude but meaningful, which
# is all a desk-scale walkthrough needs.
store = ProcedureStore(HashingEmbedder(dimension=256))
print("ingested:", store.ingest(RECIPES))

# Ingest is idempotent: same records, same ids, no growth.
print("ingested again:", store.ingest(RECIPES), "(duplicates are skipped)")

for query in ("cook tuna using sesame seeds", "bake something using flour"):
    print(f"\ntop-2 for {query!r}:")
    for result in store.search(query, k=2):
        print(f"  {result.score:+.3f}  {result.entry.procedure.output}")

# The store round-trips through a manifest + JSONL directory; vectors are
# restored bit-exactly, so searches agree before and after.
with tempfile.TemporaryDirectory() as tmp:
    target = Path(tmp) / "store"
    store.save(target)
    restored = ProcedureStore.load(target, HashingEmbedder(dimension=256))
    q = "cook tuna using sesame seeds"
    assert [r.entry.id for r in store.search(q, 3)] == [
        r.entry.id for r in restored.search(q, 3)
    ]
    print("\nsave/load round-trip preserved rankings")
