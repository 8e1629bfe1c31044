"""Command-line entry point: ingest, generate, eval, ablate, bench.

Every artifact-producing command writes a ``*.manifest.json`` beside its
output recording the effective configuration, input provenance, provider
identity and timestamps. Flags override values from an optional INI config
file (sections: pipeline, embedding, llm, evaluation, datasets).

Exit codes: 0 success, 1 pipeline/provider failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

from . import datasets, evaluation, pipeline
from .embeddings import HashingEmbedder, RemoteEmbedder
from .llm import HttpChatProvider, LLMClient, LLMError, ScriptedProvider
from .memory import ProcedureStore, StoreFormatError
from .pipeline import PipelineConfig, PipelineFailedError, run_method
from .procedures import QueryGoal

USAGE_ERROR = 2
FAILURE = 1


class UsageError(Exception):
    pass


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _read_config(path: str | None) -> configparser.ConfigParser:
    config = configparser.ConfigParser()
    if path:
        if not Path(path).exists():
            raise UsageError(f"--config: no such file: {path}")
        config.read(path, encoding="utf-8")
    return config


def _cfg_get(config, section, key, fallback=None):
    if config.has_option(section, key):
        return config.get(section, key)
    return fallback


def _resolve(flag_value, config, section, key, default, cast=str):
    if flag_value is not None:
        return flag_value
    raw = _cfg_get(config, section, key)
    if raw is not None:
        return cast(raw)
    return default


def _parse_seeds(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(part) for part in text.split(",") if part.strip()]


def _build_embedder(name: str, dimension: int):
    if name == "hash":
        return HashingEmbedder(dimension=dimension)
    if name == "remote":
        return RemoteEmbedder.from_env()
    raise UsageError(f"--embedder: unknown provider {name!r}")


def _provider_factory(spec: str):
    """Returns () -> provider. Scripted providers are reloaded per call so
    each run replays the script from the top."""
    if spec.startswith("scripted:"):
        script_path = spec.split(":", 1)[1]
        if not Path(script_path).exists():
            raise UsageError(f"--provider: no such script file: {script_path}")
        return lambda: ScriptedProvider.from_file(script_path)
    if spec == "http":
        try:
            provider = HttpChatProvider.from_env()
        except LLMError as exc:
            raise UsageError(f"--provider: {exc}") from exc
        return lambda: provider
    raise UsageError(f"--provider: expected 'http' or 'scripted:<file>', got {spec!r}")


def _write_manifest(output_path: Path, payload: dict) -> None:
    manifest_path = Path(str(output_path) + ".manifest.json")
    payload = {"created_at": _now(), **payload}
    manifest_path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _pipeline_config(args, config) -> PipelineConfig:
    return PipelineConfig(
        k=_resolve(args.k, config, "pipeline", "k", 3, int),
        n=_resolve(args.n, config, "pipeline", "n", 4, int),
        t=_resolve(args.t, config, "pipeline", "t", 3, int),
        temperature=_resolve(
            getattr(args, "temperature", None), config, "pipeline", "temperature", 0.7, float
        ),
        variant=getattr(args, "variant", None) or "full",
        method=getattr(args, "method", None) or "aag",
        few_shot_seed=_resolve(
            getattr(args, "few_shot_seed", None), config, "pipeline", "few_shot_seed", 0, int
        ),
        seed=getattr(args, "seed", None),
        domain=_resolve(
            getattr(args, "domain", None), config, "pipeline", "domain", "generic"
        ),
    )


def _load_split(args, corpus: str):
    dataset = args.dataset
    if dataset == "raw":
        return None
    seed = args.seed if args.seed is not None else 0
    if dataset == "lcstep":
        return datasets.load_lcstep(corpus)
    if dataset == "recipes":
        return datasets.load_recipes(corpus, seed)
    if dataset == "champ":
        return datasets.load_champ(corpus, seed)
    raise UsageError(f"--dataset: unknown dataset {dataset!r}")


def cmd_ingest(args, config) -> int:
    embedder_name = _resolve(args.embedder, config, "embedding", "provider", "hash")
    dimension = _resolve(args.dimension, config, "embedding", "dimension", 768, int)
    embedder = _build_embedder(embedder_name, dimension)

    split = _load_split(args, args.corpus)
    if split is None:
        procedures = datasets.read_procedure_corpus(args.corpus)
        provenance = {"dataset": "raw", "corpus": args.corpus}
    else:
        part = args.split or "memory"
        if part == "all":
            procedures = split.memory + split.validation + split.test
        elif part in ("memory", "validation", "test"):
            procedures = getattr(split, part)
        else:
            raise UsageError(f"--split: unknown slice {part!r}")
        provenance = {**split.provenance, "corpus": args.corpus, "slice": part}
        provenance.pop("ids", None)

    store_dir = Path(args.store)
    store = ProcedureStore(embedder)
    count = store.ingest(procedures)
    store.save(store_dir)
    _write_manifest(
        store_dir / "ingest",
        {
            "command": "ingest",
            "store": str(store_dir),
            "embedder": {"provider": embedder_name, "dimension": dimension},
            "provenance": provenance,
            "count": count,
        },
    )
    print(f"ingested {count}")
    return 0


def _open_store(args, config) -> ProcedureStore:
    embedder_name = _resolve(
        getattr(args, "embedder", None), config, "embedding", "provider", "hash"
    )
    dimension = _resolve(
        getattr(args, "dimension", None), config, "embedding", "dimension", 768, int
    )
    embedder = _build_embedder(embedder_name, dimension)
    return ProcedureStore.load(args.store, embedder)


def cmd_generate(args, config) -> int:
    cfg = _pipeline_config(args, config)
    provider_spec = _resolve(args.provider, config, "llm", "provider", "http")
    new_provider = _provider_factory(provider_spec)

    needs_store = cfg.method != "zero-shot"
    store = None
    if needs_store:
        if not args.store:
            raise UsageError(f"--store is required for method {cfg.method!r}")
        store = _open_store(args, config)

    goal = QueryGoal(goal=args.goal, resources=args.resources)
    client = LLMClient(new_provider())
    procedure, trace = run_method(goal, cfg, store=store, client=client)

    for i, step in enumerate(procedure.steps, start=1):
        print(f"{i}. {step}")
    if args.trace:
        trace_path = Path(args.trace)
        trace_path.write_text(
            json.dumps(trace.to_dict(), ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )
        _write_manifest(
            trace_path,
            {
                "command": "generate",
                "store": args.store,
                "provider": new_provider().describe(),
                "config": cfg.__dict__,
                "goal": {"goal": goal.goal, "resources": goal.resources},
                "outputs": [str(trace_path)],
            },
        )
    return 0


def _runner(method: str, cfg: PipelineConfig, store, new_provider):
    """Fresh client per call so every run owns its ledger."""

    def run(goal: QueryGoal):
        run_cfg = PipelineConfig(**{**cfg.__dict__, "method": method, "variant": "full"})
        if method in pipeline.VARIANTS and method != "full":
            run_cfg = PipelineConfig(
                **{**cfg.__dict__, "method": "aag", "variant": method}
            )
        return run_method(goal, run_cfg, store=store, client=LLMClient(new_provider()))

    return run


def _judge_sample(index, goal, run_a, run_b, new_provider, seeds, domain):
    proc_a, _ = run_a(goal)
    proc_b, _ = run_b(goal)
    return evaluation.judge_pair(
        goal,
        proc_a,
        proc_b,
        LLMClient(new_provider()),
        seeds=seeds,
        sample_id=f"sample-{index:04d}",
        domain=domain,
    )


def _eval_pair(goals, method_a, method_b, cfg, store, new_provider, seeds, workers):
    run_a = _runner(method_a, cfg, store, new_provider)
    run_b = _runner(method_b, cfg, store, new_provider)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            verdicts = list(
                pool.map(
                    lambda item: _judge_sample(
                        item[0], item[1], run_a, run_b, new_provider, seeds, cfg.domain
                    ),
                    enumerate(goals),
                )
            )
    else:
        verdicts = [
            _judge_sample(i, goal, run_a, run_b, new_provider, seeds, cfg.domain)
            for i, goal in enumerate(goals)
        ]
    return evaluation.aggregate(verdicts, method_a=method_a, method_b=method_b)


def _read_goals(path: str, limit: int | None):
    procedures = datasets.read_procedure_corpus(path)
    if limit:
        procedures = procedures[:limit]
    return [QueryGoal(goal=p.output, resources=p.input) for p in procedures]


def cmd_eval(args, config) -> int:
    cfg = _pipeline_config(args, config)
    provider_spec = _resolve(args.provider, config, "llm", "provider", "http")
    new_provider = _provider_factory(provider_spec)
    seeds = _parse_seeds(
        _resolve(args.seeds, config, "evaluation", "seeds", "1..10")
    )
    judges = _resolve(args.judges, config, "evaluation", "judges", 10, int)
    if judges != len(seeds):
        raise UsageError(f"--judges: expected {len(seeds)} to match the seed list")
    store = _open_store(args, config)
    goals = _read_goals(args.test, args.limit)
    if not goals:
        raise UsageError("--test: no usable samples")

    report = _eval_pair(
        goals, args.method_a, args.method_b, cfg, store, new_provider, seeds, args.workers
    )
    print(evaluation.format_table([report]))
    if args.report:
        report_path = Path(args.report)
        report_path.write_text(
            json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )
        _write_manifest(
            report_path,
            {
                "command": "eval",
                "store": args.store,
                "test": args.test,
                "provider": new_provider().describe(),
                "config": cfg.__dict__,
                "seeds": seeds,
                "outputs": [str(report_path)],
            },
        )
    return 0


def cmd_ablate(args, config) -> int:
    cfg = _pipeline_config(args, config)
    provider_spec = _resolve(args.provider, config, "llm", "provider", "http")
    new_provider = _provider_factory(provider_spec)
    seeds = _parse_seeds(
        _resolve(args.seeds, config, "evaluation", "seeds", "1..10")
    )
    store = _open_store(args, config)
    goals = _read_goals(args.test, args.limit)
    if not goals:
        raise UsageError("--test: no usable samples")

    reports = []
    for variant in ("noqg", "noag", "nocr", "noag-nocr"):
        reports.append(
            _eval_pair(goals, "aag", variant, cfg, store, new_provider, seeds, args.workers)
        )
    print(evaluation.format_table(reports))
    if args.report:
        report_path = Path(args.report)
        report_path.write_text(
            json.dumps(
                [r.to_dict() for r in reports], ensure_ascii=False, indent=2
            )
            + "\n",
            encoding="utf-8",
        )
        _write_manifest(
            report_path,
            {
                "command": "ablate",
                "store": args.store,
                "test": args.test,
                "provider": new_provider().describe(),
                "config": cfg.__dict__,
                "seeds": seeds,
                "outputs": [str(report_path)],
            },
        )
    return 0


def cmd_bench(args, config) -> int:
    cfg = _pipeline_config(args, config)
    provider_spec = _resolve(args.provider, config, "llm", "provider", "http")
    new_provider = _provider_factory(provider_spec)
    store = _open_store(args, config)
    goals = _read_goals(args.test, args.limit)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for method in methods:
        if method not in pipeline.METHODS and method not in pipeline.VARIANTS:
            raise UsageError(f"--methods: unknown method {method!r}")

    results = []
    for method in methods:
        run = _runner(method, cfg, store, new_provider)
        results.append(evaluation.bench(method, goals, run))
    header = f"{'method':<12} {'samples':>8} {'failures':>9} {'mean s':>9} {'gen':>7} {'retr':>7}"
    print(header)
    print("-" * len(header))
    for r in results:
        print(
            f"{r.method:<12} {r.samples:>8} {r.failures:>9} {r.mean_duration_s:>9.3f}"
            f" {r.mean_generations:>7.2f} {r.mean_retrievals:>7.2f}"
        )
    if args.report:
        report_path = Path(args.report)
        report_path.write_text(
            json.dumps([r.to_dict() for r in results], indent=2) + "\n",
            encoding="utf-8",
        )
        _write_manifest(
            report_path,
            {
                "command": "bench",
                "store": args.store,
                "test": args.test,
                "provider": new_provider().describe(),
                "config": cfg.__dict__,
                "methods": methods,
                "outputs": [str(report_path)],
            },
        )
    return 0


def _add_pipeline_flags(parser):
    parser.add_argument("--k", type=int, default=None, help="retrieval fan-out")
    parser.add_argument("--n", type=int, default=None, help="rewritten query budget")
    parser.add_argument("--t", type=int, default=None, help="max refinement cycles")
    parser.add_argument("--temperature", type=float, default=None)
    parser.add_argument("--domain", choices=("lcstep", "recipe", "champ", "generic"), default=None)
    parser.add_argument("--provider", default=None, help="'http' or 'scripted:<file>'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="analogygen")
    parser.add_argument("--config", default=None, help="INI config file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="embed a corpus into a procedure store")
    p.add_argument("--corpus", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--dataset", choices=("raw", "lcstep", "recipes", "champ"), default="raw")
    p.add_argument("--split", choices=("memory", "validation", "test", "all"), default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--embedder", choices=("hash", "remote"), default=None)
    p.add_argument("--dimension", type=int, default=None)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("generate", help="produce a procedure for one goal")
    p.add_argument("--store", default=None)
    p.add_argument("--goal", required=True)
    p.add_argument("--resources", required=True)
    p.add_argument("--method", choices=pipeline.METHODS, default="aag")
    p.add_argument("--variant", choices=pipeline.VARIANTS, default="full")
    p.add_argument("--few-shot-seed", dest="few_shot_seed", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trace", default=None, help="write the structured run trace here")
    p.add_argument("--embedder", choices=("hash", "remote"), default=None)
    p.add_argument("--dimension", type=int, default=None)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("eval", help="pairwise-judge two methods on a test set")
    p.add_argument("--store", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--method-a", dest="method_a", required=True)
    p.add_argument("--method-b", dest="method_b", required=True)
    p.add_argument("--judges", type=int, default=None)
    p.add_argument("--seeds", default=None, help="e.g. '1..10' or '1,2,3'")
    p.add_argument("--report", default=None)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--embedder", choices=("hash", "remote"), default=None)
    p.add_argument("--dimension", type=int, default=None)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="compare the full pipeline against each variant")
    p.add_argument("--store", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--report", default=None)
    p.add_argument("--seeds", default=None)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--embedder", choices=("hash", "remote"), default=None)
    p.add_argument("--dimension", type=int, default=None)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("bench", help="mean runtime and call counts per method")
    p.add_argument("--store", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--methods", default="aag,rag")
    p.add_argument("--report", default=None)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--embedder", choices=("hash", "remote"), default=None)
    p.add_argument("--dimension", type=int, default=None)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _read_config(args.config)
        return args.func(args, config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (PipelineFailedError, LLMError, StoreFormatError, datasets.CorpusFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE


if __name__ == "__main__":
    sys.exit(main())
