"""What-if scenarios: non-destructive overrides compared against a baseline.

A scenario bundles overrides (amounts, confidences, requirement
inclusion, OR selections) that are applied to a copy of the graph; the
baseline never changes. `run_whatif` evaluates both and reports, per
objective, the numeric deltas and any status transition.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from decimal import Decimal
from fractions import Fraction
from typing import Union

from .engine import EvalOptions, EvaluationResult, ObjectiveOutcome, evaluate
from .model import ContributionLink, GoalGraph, Quantity, Requirement, build_graph


@dataclass(frozen=True)
class SetAmount:
    link: str
    amount: Quantity


@dataclass(frozen=True)
class SetConfidence:
    link: str
    value: Decimal


@dataclass(frozen=True)
class IncludeRequirement:
    requirement: str
    included: bool


@dataclass(frozen=True)
class SelectOr:
    group: str
    link: str


Override = Union[SetAmount, SetConfidence, IncludeRequirement, SelectOr]


@dataclass(frozen=True)
class Scenario:
    name: str = ""
    overrides: tuple[Override, ...] = ()


@dataclass(frozen=True)
class DiffRow:
    objective: str
    baseline: ObjectiveOutcome
    scenario: ObjectiveOutcome
    status_changed: bool
    delta_raw: Fraction
    delta_adjusted: Fraction


@dataclass(frozen=True)
class DiffReport:
    """Per-objective comparison plus counts of status transitions."""

    rows: tuple[DiffRow, ...]
    transitions: dict[str, int]

    @property
    def changed(self) -> tuple[DiffRow, ...]:
        return tuple(row for row in self.rows if row.status_changed)


def apply_scenario(graph: GoalGraph, scenario: Scenario) -> GoalGraph:
    """Return a new graph with the scenario's graph-level overrides applied.

    SelectOr overrides do not alter the graph (they feed evaluation via
    `scenario_options`) but their references are still checked here. Unit
    compatibility of SetAmount is enforced by rebuilding the graph.
    """
    links = {l.id: l for l in graph.links}
    nodes = {n.id: n for n in graph.nodes}
    groups = {
        l.or_group: True for l in graph.contributions if l.or_group is not None
    }
    for override in scenario.overrides:
        if isinstance(override, SetAmount):
            link = links.get(override.link)
            if not isinstance(link, ContributionLink):
                raise ValueError(f"override targets unknown contribution link {override.link!r}")
            links[link.id] = replace(link, amount=override.amount)
        elif isinstance(override, SetConfidence):
            link = links.get(override.link)
            if not isinstance(link, ContributionLink):
                raise ValueError(f"override targets unknown contribution link {override.link!r}")
            links[link.id] = replace(link, confidence=override.value)
        elif isinstance(override, IncludeRequirement):
            node = nodes.get(override.requirement)
            if not isinstance(node, Requirement):
                raise ValueError(f"override targets unknown requirement {override.requirement!r}")
            nodes[node.id] = replace(node, included=override.included)
        elif isinstance(override, SelectOr):
            if override.group not in groups:
                raise ValueError(f"override selects unknown or-group {override.group!r}")
            member_ids = {
                l.id for l in graph.contributions if l.or_group == override.group
            }
            if override.link not in member_ids:
                raise ValueError(
                    f"{override.link!r} is not a member of or-group {override.group!r}"
                )
    return build_graph(nodes.values(), graph.authors, links.values(), name=graph.name)


def scenario_options(options: EvalOptions, scenario: Scenario) -> EvalOptions:
    """Merge the scenario's OR selections into the evaluation options."""
    selection = dict(options.or_selection)
    for override in scenario.overrides:
        if isinstance(override, SelectOr):
            selection[override.group] = override.link
    return replace(options, or_selection=selection)


def compare(baseline: EvaluationResult, scenario: EvaluationResult) -> DiffReport:
    """Diff two evaluations over the same objective set."""
    if set(baseline.outcomes) != set(scenario.outcomes):
        raise ValueError("evaluations cover different objective sets")
    rows = []
    transitions: dict[str, int] = {}
    for oid in sorted(baseline.outcomes):
        before = baseline.outcomes[oid]
        after = scenario.outcomes[oid]
        changed = before.status is not after.status
        if changed:
            key = f"{before.status.value}->{after.status.value}"
            transitions[key] = transitions.get(key, 0) + 1
        rows.append(
            DiffRow(
                objective=oid,
                baseline=before,
                scenario=after,
                status_changed=changed,
                delta_raw=after.raw_sum - before.raw_sum,
                delta_adjusted=after.adjusted_sum - before.adjusted_sum,
            )
        )
    return DiffReport(rows=tuple(rows), transitions=dict(sorted(transitions.items())))


def run_whatif(
    graph: GoalGraph, scenario: Scenario, options: EvalOptions | None = None
) -> DiffReport:
    """Evaluate baseline and scenario, returning the comparison."""
    options = options or EvalOptions()
    baseline = evaluate(graph, options)
    varied = evaluate(apply_scenario(graph, scenario), scenario_options(options, scenario))
    return compare(baseline, varied)
