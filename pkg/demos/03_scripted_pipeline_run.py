"""One full analogy-pipeline run, offline, with per-stage call accounting.

The scripted provider replays canned responses by stage label, which makes
the whole control flow inspectable and deterministic: retrieval-grounded
draft, query generation, per-question retrieval + answers, update, then the
critic/edit loop.

Run:
    python demos/03_scripted_pipeline_run.py
"""

from analogygen import (
    HashingEmbedder,
    LLMClient,
    PipelineConfig,
    Procedure,
    ProcedureStore,
    QueryGoal,
    ScriptedProvider,
    run_aag,
    run_variant,
)

store = ProcedureStore(HashingEmbedder(dimension=128))
store.ingest(
    [
        Procedure(
            input=f"toolkit {i}",
            output=f"assemble fixture {i}",
            steps=(f"bolt part {i}", f"torque the fasteners {i}"),
        )
        for i in range(6)
    ]
)

REWRITE = """steps:
- outline the assembly order
- identify torque values
- plan the final inspection

queries:
- which parts bolt on first?
- what torque do the fasteners need?
- how is alignment checked?
- what does final inspection cover?"""

SCRIPT = {
    "rag": ["1. bolt the frame\n2. attach the housing"],
    "query-gen": [REWRITE],
    "answer-gen": [f"Summary answer {i}." for i in range(1, 5)],
    "update": ["1. bolt the frame\n2. attach the housing\n3. torque the fasteners"],
    "critic": ["- mention the inspection step", "- cite the torque table", "NO UPDATE REQUIRED"],
    "edit": [
        "1. bolt the frame\n2. attach the housing\n3. torque the fasteners\n4. inspect",
        "1. bolt the frame\n2. attach the housing\n3. torque per table T1\n4. inspect",
    ],
}

goal = QueryGoal(goal="assemble the prototype", resources="toolkit, torque wrench")
client = LLMClient(ScriptedProvider(SCRIPT))
procedure, trace = run_aag(goal, store, client, PipelineConfig())

print("final procedure:")
for i, step in enumerate(procedure.steps, start=1):
    print(f"  {i}. {step}")

print("\nstage sequence:", " -> ".join(s.stage for s in trace.stages))
print("generation calls:", trace.ledger.generation_calls)
print("retrieval searches:", trace.ledger.retrieval_searches)
print("by stage:", trace.ledger.generations_by_stage)

# The ablation variants skip stages; their call budgets follow directly.
print("\nvariant call budgets (generations, retrievals):")
for variant in ("noqg", "noag", "nocr", "noag-nocr"):
    client = LLMClient(ScriptedProvider({k: list(v) for k, v in SCRIPT.items()}))
    _, vtrace = run_variant(goal, store, client, PipelineConfig(variant=variant))
    print(
        f"  {variant:<10} {vtrace.ledger.generation_calls:>2}"
        f" {vtrace.ledger.retrieval_searches:>2}"
    )
