import pytest

from analogygen.procedures import render_procedure, render_steps
from analogygen.prompts import (
    MalformedRewriteError,
    MissingBindingError,
    CriticOutcome,
    get_template,
    parse_critic_output,
    parse_rewrite_output,
    render,
)

from conftest import (
    BROWSER_AGENT,
    CUSTOM_LLM,
    EXAMPLE_GOAL,
    EXAMPLE_RESOURCES,
    MULTI_INPUT_TOOL,
    SINGLE_INPUT_TOOL,
    load_golden,
    load_qa_entries,
)


def docs(*procedures):
    return "\n\n".join(render_procedure(p) for p in procedures)


class TestGoldenPrompts:
    """Each canonical prompt, rendered with the worked-example bindings,
    reproduces the corresponding golden file byte-for-byte (goldens are
    normalized by per-line trailing-whitespace stripping only)."""

    def test_query_rewrite(self):
        got = render(
            get_template("query-rewrite", "lcstep"),
            {"n_queries": "4", "output": EXAMPLE_GOAL, "input": EXAMPLE_RESOURCES},
        )
        assert got == load_golden("query_rewrite_prompt.txt")

    def test_summarize(self):
        got = render(
            get_template("summarize", "lcstep"),
            {
                "question": "How to define custom input schema in [tool name]?",
                "knowledge": docs(MULTI_INPUT_TOOL, BROWSER_AGENT, SINGLE_INPUT_TOOL),
            },
        )
        assert got == load_golden("summarize_prompt.txt")

    def test_rag_generate(self):
        got = render(
            get_template("rag-generate", "lcstep"),
            {
                "documentation": docs(MULTI_INPUT_TOOL, SINGLE_INPUT_TOOL, CUSTOM_LLM),
                "output": EXAMPLE_GOAL,
                "input": EXAMPLE_RESOURCES,
            },
        )
        assert got == load_golden("rag_prompt.txt")

    def test_update_response(self):
        knowledge = "\n\n".join(f"Q: {q}\nA: {a}" for q, a in load_qa_entries())
        got = render(
            get_template("update-response", "lcstep"),
            {
                "knowledge": knowledge,
                "steps": load_golden("rag_response.txt"),
                "output": EXAMPLE_GOAL,
                "input": EXAMPLE_RESOURCES,
            },
        )
        assert got == load_golden("update_prompt.txt")

    def test_critic_validate(self):
        got = render(
            get_template("critic-validate", "lcstep"),
            {
                "output": EXAMPLE_GOAL,
                "input": EXAMPLE_RESOURCES,
                "steps": load_golden("updated_steps.txt").rstrip("\n"),
            },
        )
        assert got == load_golden("critic_prompt.txt")

    def test_judge_pairwise_template_text(self):
        template = get_template("judge-pairwise", "lcstep")
        assert template.body == load_golden("judge_prompt.txt")

    def test_judge_pairwise_render(self):
        got = render(
            get_template("judge-pairwise", "generic"),
            {
                "output": "bake bread",
                "input": "flour",
                "proc1_steps": render_steps(("mix", "bake")),
                "proc2_steps": render_steps(("buy bread",)),
            },
        )
        assert 'for example: "Choice: [[2]]"' in got
        assert "[BEGIN PROCEDURE 1]\n1. mix\n2. bake\n[END OF PROCEDURE 1]" in got


class TestRender:
    def test_missing_binding_names_placeholder(self):
        template = get_template("critic-validate", "generic")
        with pytest.raises(MissingBindingError) as exc_info:
            render(template, {"input": "x", "steps": "1. s"})
        assert "{output}" in str(exc_info.value)

    def test_no_residual_placeholders(self):
        import re

        for stage in ("query-rewrite", "rag-generate", "update-response", "react"):
            template = get_template(stage, "generic")
            bindings = {name: "value" for name in template.placeholders}
            assert not re.search(r"\{[a-z0-9_]+\}", render(template, bindings))

    def test_placeholders_in_values_untouched(self):
        template = get_template("critic-validate", "generic")
        got = render(
            template, {"output": "{input}", "input": "res", "steps": "1. s"}
        )
        assert "[USER GOAL]\n{input}" in got

    def test_deterministic(self):
        template = get_template("zero-shot", "recipe")
        bindings = {"output": "a pie", "input": "apples"}
        assert render(template, bindings) == render(template, bindings)

    def test_domain_variants_differ_in_frame(self):
        lcstep = get_template("rag-generate", "lcstep").body
        recipe = get_template("rag-generate", "recipe").body
        champ = get_template("rag-generate", "champ").body
        assert "LangChain" in lcstep
        assert "recipe" in recipe and "LangChain" not in recipe
        assert "math problem" in champ and "LangChain" not in champ

    def test_unknown_stage_or_domain(self):
        with pytest.raises(ValueError):
            get_template("nonsense", "generic")
        with pytest.raises(ValueError):
            get_template("rag-generate", "klingon")


class TestParseRewriteOutput:
    def test_worked_example(self):
        steps, queries = parse_rewrite_output(load_golden("rewrite_response.txt"), 4)
        assert len(steps) == 4
        assert len(queries) == 4
        assert queries[0] == "How to define custom input schema in [tool name]?"

    def test_truncates_to_budget(self):
        raw = "steps:\n- a\nqueries:\n" + "\n".join(f"- q{i}" for i in range(6))
        _, queries = parse_rewrite_output(raw, 4)
        assert queries == ["q0", "q1", "q2", "q3"]

    def test_returns_fewer_when_fewer_emitted(self):
        raw = "steps:\n- a\nqueries:\n- only one"
        _, queries = parse_rewrite_output(raw, 4)
        assert queries == ["only one"]

    def test_case_insensitive_headers(self):
        raw = "Steps:\n- a\nQUERIES:\n- q"
        steps, queries = parse_rewrite_output(raw, 4)
        assert steps == ["a"] and queries == ["q"]

    def test_no_headers(self):
        with pytest.raises(MalformedRewriteError):
            parse_rewrite_output("just some prose", 4)

    def test_numbered_lists_accepted(self):
        raw = "steps:\n1. a\n2. b\nqueries:\n1. q1"
        steps, queries = parse_rewrite_output(raw, 4)
        assert steps == ["a", "b"] and queries == ["q1"]


class TestParseCriticOutput:
    def test_sentinel(self):
        assert parse_critic_output("NO UPDATE REQUIRED") == CriticOutcome(no_update=True)

    def test_sentinel_embedded_in_decoration(self):
        out = parse_critic_output("Sure!\nNO UPDATE REQUIRED\nThanks.")
        assert out.no_update

    def test_sentinel_case_sensitive(self):
        out = parse_critic_output("no update required")
        assert not out.no_update

    def test_worked_example_is_edit_list(self):
        raw = load_golden("critic_response.txt")
        out = parse_critic_output(raw)
        assert not out.no_update
        assert "include more specific details" in out.edits

    def test_empty_string_is_edit_list(self):
        out = parse_critic_output("")
        assert out == CriticOutcome(no_update=False, edits="")
