"""End-to-end run against a real OpenAI-compatible endpoint (optional).

Requires:
    ANALOGYGEN_BASE_URL   chat-completions base URL, e.g. https://api.openai.com/v1
    ANALOGYGEN_API_KEY    bearer token
    ANALOGYGEN_MODEL      model name (defaults to gpt-3.5-turbo)

Run:
    python demos/06_live_endpoint.py
"""

import os
import sys

from analogygen import (
    HashingEmbedder,
    HttpChatProvider,
    LLMClient,
    PipelineConfig,
    Procedure,
    ProcedureStore,
    QueryGoal,
    run_aag,
)

if not os.environ.get("ANALOGYGEN_BASE_URL"):
    print("ANALOGYGEN_BASE_URL is not set; nothing to call. See the module docstring.")
    sys.exit(0)

store = ProcedureStore(HashingEmbedder())
store.ingest(
    [
        Procedure(
            input="flour, yeast, water, salt",
            output="a loaf of bread",
            steps=("knead the dough", "let it rise an hour", "bake at 230C for 35 minutes"),
        ),
        Procedure(
            input="tuna steaks, sesame seeds, soy sauce",
            output="sesame-crusted tuna",
            steps=("press sesame seeds onto the tuna", "sear one minute per side"),
        ),
        Procedure(
            input="chickpeas, tahini, lemon, garlic",
            output="a bowl of hummus",
            steps=("blend chickpeas with tahini", "season with lemon and garlic"),
        ),
    ]
)

goal = QueryGoal(goal="a crusted baked salmon dinner", resources="salmon, breadcrumbs, an oven")
client = LLMClient(HttpChatProvider.from_env())
procedure, trace = run_aag(goal, store, client, PipelineConfig(domain="recipe"))

print("generated procedure:")
for i, step in enumerate(procedure.steps, start=1):
    print(f"  {i}. {step}")
print(
    f"\n{trace.ledger.generation_calls} generation calls,"
    f" {trace.ledger.retrieval_searches} retrievals,"
    f" {trace.duration_s:.1f}s"
)
