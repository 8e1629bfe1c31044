"""The procedure formalism: records, composition, rendering, parsing.

Run:
    python demos/01_procedure_basics.py
"""

from analogygen import Procedure, RenderStyle, compose, parse_steps, render_procedure

# A procedure is (input, output, steps): what you have, what you want, and
# the ordered actions between them.
brew = Procedure(
    input="ground coffee, hot water",
    output="a pot of coffee",
    steps=("put the grounds in the filter", "pour water through", "wait four minutes"),
)
serve = Procedure(
    input="a pot of coffee",
    output="a shared table of happy guests",
    steps=("warm the mugs", "pour and hand out"),
)

# Two procedures chain when one's output is the other's input. The composite
# runs end to end and keeps every step in order.
morning = compose(brew, serve)
print("composed procedure:")
print(render_procedure(morning, RenderStyle.DOCUMENTATION))
print()

# Rendering is deterministic, so the same record always produces the same
# text; that text is also what the embedder sees.
assert render_procedure(morning) == render_procedure(morning)

# Model output comes back as numbered or bulleted lists in assorted shapes;
# parse_steps normalizes them into a clean step list.
raw_model_output = """Here is what I would do:
1. put the grounds in the filter
2. pour water through
   slowly, in circles
3. wait four minutes
"""
print("parsed from model output:", parse_steps(raw_model_output))
