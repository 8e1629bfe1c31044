import json
from pathlib import Path

import pytest

from analogygen.embeddings import HashingEmbedder
from analogygen.memory import ProcedureStore
from analogygen.procedures import Procedure

GOLDEN_DIR = Path(__file__).parent / "data" / "golden"

# Example bindings used throughout the golden prompt fixtures.
EXAMPLE_GOAL = (
    "set up a custom input schema for a tool with strict requirements"
    " and custom validation logic"
)
EXAMPLE_RESOURCES = "an LLM"


def load_golden(name: str) -> str:
    return (GOLDEN_DIR / name).read_text(encoding="utf-8").rstrip("\n")


def load_qa_entries() -> list[tuple[str, str]]:
    data = json.loads((GOLDEN_DIR / "qa_context.json").read_text(encoding="utf-8"))
    return [(q, a) for q, a in data]


def sample_procedures(count: int, prefix: str = "proc") -> list[Procedure]:
    return [
        Procedure(
            input=f"{prefix} resource {i}",
            output=f"{prefix} goal {i}",
            steps=(f"do the {prefix} thing {i}", f"verify the {prefix} result {i}"),
        )
        for i in range(count)
    ]


def rewrite_text(n_queries: int) -> str:
    outline = "\n".join(f"- outline item {i}" for i in range(1, 4))
    queries = "\n".join(f"- lookup question {i}" for i in range(1, n_queries + 1))
    return f"steps:\n{outline}\n\nqueries:\n{queries}"


def build_script(n_queries: int = 4, sentinel_cycle: int | None = None, t: int = 3) -> dict:
    """Scripted responses covering a full analogy-pipeline run.

    Variants that skip stages simply leave some queues unread. When
    ``sentinel_cycle`` is set, the critic emits the no-edits sentinel on
    that cycle; otherwise it always asks for edits.
    """
    script = {
        "rag": ["1. draft step one\n2. draft step two"],
        "query-gen": [rewrite_text(n_queries)],
        "answer-gen": [f"Use approach {i}." for i in range(1, n_queries + 1)],
        "update": ["1. updated step one\n2. updated step two"],
        "critic": [],
        "edit": [],
    }
    for cycle in range(1, t + 1):
        if sentinel_cycle is not None and cycle == sentinel_cycle:
            script["critic"].append("NO UPDATE REQUIRED")
            break
        script["critic"].append(f"- tighten step {cycle}\n- add detail {cycle}")
        script["edit"].append(f"1. edited step {cycle}a\n2. edited step {cycle}b")
    return script


# The worked-example procedures that appear in the golden prompt fixtures.
MULTI_INPUT_TOOL = Procedure(
    input="an LLM",
    output="set up a tool that requires multiple inputs for an agent",
    steps=(
        "Define a function for your tool that takes multiple inputs.",
        "Create a `StructuredTool` using `langchain.tools.StructuredTool.from_function`,"
        " providing the function you defined.",
        "Initialize your agent with `langchain.agents.initialize_agent`, providing a list"
        " containing the `StructuredTool`, the language model, and the agent type"
        " `langchain.agents.AgentType.STRUCTURED_CHAT_ZERO_SHOT_REACT_DESCRIPTION`.",
    ),
)
BROWSER_AGENT = Procedure(
    input="an LLM, PlayWrightBrowserToolkit",
    output="build a structured tool chat agent capable of using multi-input tools"
    " and handling memory",
    steps=(
        "Initialize a PlayWrightBrowserToolkit using"
        " `langchain.agents.agent_toolkits.PlayWrightBrowserToolkit.from_browser` with an"
        " asynchronous browser created using"
        " `langchain.tools.playwright.utils.create_async_playwright_browser`.",
        "Get the tools from the browser toolkit using the `get_tools` method.",
        "Initialize your language model using `langchain.chat_models.ChatOpenAI`.",
        "Initialize your agent using `langchain.agents.initialize_agent`, providing the"
        " tools, the language model, and the agent type"
        " `langchain.agents.AgentType.STRUCTURED_CHAT_ZERO_SHOT_REACT_DESCRIPTION`.",
        "Execute the `arun` method on your agent with a string as the input.",
    ),
)
SINGLE_INPUT_TOOL = Procedure(
    input="an LLM",
    output="set up a tool that requires a single string input for an agent",
    steps=(
        "Define a function for your tool that takes a single string input and parses it"
        " into multiple inputs for the actual operation.",
        "Create a `Tool` using `langchain.agents.Tool`, providing the tool name, the"
        " function you defined, and a description.",
        "Initialize your agent with `langchain.agents.initialize_agent`, providing a list"
        " containing the `Tool`, the language model, and the agent type"
        " `langchain.agents.AgentType.ZERO_SHOT_REACT_DESCRIPTION`.",
    ),
)
CUSTOM_LLM = Procedure(
    input="LangChain's base LLM class",
    output="create a custom LLM that returns the first N characters of the input",
    steps=(
        "Define a custom LLM class that inherits from `langchain.llms.base.LLM`.",
        "Implement the `_llm_type` property in the custom class to return a string that"
        " identifies the type of LLM.",
        "Implement the `_call` method in the custom class to accept a string prompt and"
        " optional stop words, and return the first N characters of the prompt.",
        "Implement the `_identifying_params` property in the custom class to return a"
        " dictionary with \"n\" as the key and the number of characters to return as"
        " the value.",
        "Instantiate the custom LLM class, providing the number of characters to return"
        " as an argument.",
    ),
)


@pytest.fixture
def small_store() -> ProcedureStore:
    store = ProcedureStore(HashingEmbedder(dimension=64))
    store.ingest(sample_procedures(6))
    return store
