"""The pairwise judge: ten order-balanced calls, majority vote, aggregation.

Position bias is the failure mode this protocol exists to cancel: a judge
that always prefers whatever sits in slot 1 ends up voting 5-5 once the
orderings are balanced, which scores as a tie rather than a win.

Run:
    python demos/04_pairwise_judging.py
"""

from analogygen import LLMClient, Procedure, QueryGoal, ScriptedProvider, judge_pair
from analogygen.evaluation import aggregate

goal = QueryGoal(goal="plan a vegetable garden", resources="seeds, a plot, a trowel")
thorough = Procedure(
    input=goal.resources,
    output=goal.goal,
    steps=("test the soil", "sketch the beds", "sow in rows", "water on a schedule"),
)
hasty = Procedure(
    input=goal.resources,
    output=goal.goal,
    steps=("scatter the seeds", "hope"),
)


def judged(responses):
    client = LLMClient(ScriptedProvider({"judge": list(responses)}))
    return judge_pair(goal, thorough, hasty, client, seeds=range(1, 11))


# A position-biased judge: always picks procedure slot 1. Five calls show A
# first and five show B first, so the mapped votes split evenly.
biased = judged(["Choice: [[1]]"] * 10)
print("always-slot-1 judge outcome:", biased.outcome)

# A judge with an actual preference for the thorough plan: slot varies, the
# choice follows the content. Slot 1 holds A for the first five calls and B
# for the last five, so these responses all point at A.
preferring = judged(["Choice: [[1]]"] * 5 + ["Choice: [[2]]"] * 5)
print("content-driven judge outcome:", preferring.outcome)

# Votes map through each call's ordering; the raw record keeps everything.
for raw in preferring.raw_choices[4:6]:
    print(f"  seed={raw.seed} ordering={raw.ordering} parsed=[[{raw.choice}]]")

# Aggregation reports win/loss/tie percentages over a verdict set.
verdicts = [judged(["Choice: [[1]]"] * 5 + ["Choice: [[2]]"] * 5) for _ in range(3)]
verdicts += [judged(["Choice: [[1]]"] * 10)]
report = aggregate(verdicts, method_a="thorough", method_b="hasty")
print(
    f"\naggregate over {report.sample_count} samples:"
    f" win {report.win_pct}% / loss {report.loss_pct}% / tie {report.tie_pct}%"
)
