"""Satisfaction propagation, value attribution and prioritisation.

Evaluation walks the contribution DAG bottom-up. A requirement counts as
fully satisfied while it is included; an objective's raw sum adds each
counted incoming amount scaled by its source's satisfaction fraction, and
the adjusted sum additionally multiplies each amount by the link's
effective confidence. An objective whose raw sum reaches the magnitude
but whose adjusted sum does not is *in doubt*: numerically promised, not
credibly promised.

Attribution answers the converse question: how much of one objective's
scale does a single requirement deliver? It follows every contribution
chain from the requirement, translating amounts at each hop by the
intermediate objective's magnitude fraction and compounding confidences
multiplicatively along the chain. Credit also flows up decomposition
links, so an abstract requirement is worth what its refinements deliver.

All arithmetic is exact (rationals); nothing here rounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .model import (
    Combinator,
    ContributionLink,
    DecompositionLink,
    Diagnostic,
    GoalGraph,
    ModelError,
    Objective,
    Requirement,
    Severity,
    validate,
)

ONE = Fraction(1)
ZERO = Fraction(0)


class Status(str, Enum):
    SATISFIED = "satisfied"
    IN_DOUBT = "in_doubt"
    UNSATISFIED = "unsatisfied"
    UNDETERMINED = "undetermined"


class OrPolicy(str, Enum):
    """How unselected OR alternative groups are treated.

    explicit: only user selections count; an unselected group leaves the
        target undetermined.
    best: unselected groups auto-pick the member with the highest
        confidence-adjusted inflow (smallest link id breaks ties).
    pessimistic: selections are disregarded entirely; no OR link counts
        and every OR target is undetermined.
    """

    EXPLICIT = "explicit"
    BEST_ADJUSTED = "best"
    PESSIMISTIC = "pessimistic"


@dataclass(frozen=True)
class EvalOptions:
    use_confidence: bool = True
    use_calibration: bool = True
    or_policy: OrPolicy = OrPolicy.EXPLICIT
    or_selection: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class ObjectiveOutcome:
    objective: str
    raw_sum: Fraction
    adjusted_sum: Fraction
    raw_fraction: Fraction
    adjusted_fraction: Fraction
    status: Status


@dataclass(frozen=True)
class EvaluationResult:
    outcomes: dict[str, ObjectiveOutcome]
    options: EvalOptions
    warnings: tuple[Diagnostic, ...]


@dataclass(frozen=True)
class ChainSummary:
    """One contribution chain: what it delivers and how credible it is."""

    links: tuple[str, ...]
    delivered_amount: Fraction
    compound_confidence: Fraction


@dataclass(frozen=True)
class Attribution:
    """Everything one requirement delivers toward one objective."""

    requirement: str
    objective: str
    raw_amount: Fraction
    adjusted_amount: Fraction
    compound_confidence: Fraction
    paths: tuple[ChainSummary, ...]
    warnings: tuple[Diagnostic, ...] = ()


@dataclass(frozen=True)
class PriorityRow:
    requirement: str
    per_objective: dict[str, Fraction]
    score: Fraction
    value_density: Fraction | None


# --- shared propagation machinery ---------------------------------------------


@dataclass
class _Propagation:
    satisfaction: dict[str, Fraction]
    counted: dict[str, tuple[ContributionLink, ...]]
    unresolved: dict[str, tuple[str, ...]]
    order: list[Objective]


def _or_groups(graph: GoalGraph) -> dict[str, list[ContributionLink]]:
    groups: dict[str, list[ContributionLink]] = {}
    for link in graph.contributions:
        if link.or_group is not None:
            groups.setdefault(link.or_group, []).append(link)
    return groups


def _check_selection(graph: GoalGraph, options: EvalOptions) -> None:
    groups = _or_groups(graph)
    for group, link_id in options.or_selection.items():
        members = groups.get(group)
        if members is None:
            raise ValueError(f"or_selection references unknown group {group!r}")
        if link_id not in {l.id for l in members}:
            raise ValueError(
                f"or_selection for group {group!r}: {link_id!r} is not a member"
            )


def _effective_confidence(
    graph: GoalGraph, link: ContributionLink, options: EvalOptions
) -> Fraction:
    if not options.use_confidence:
        return ONE
    kappa = Fraction(link.confidence)
    if options.use_calibration and link.author is not None:
        kappa *= Fraction(graph.author_by_id[link.author].calibration)
    return kappa


def _objective_order(graph: GoalGraph) -> list[Objective]:
    """Objectives in dependency order over contribution edges, ids breaking ties."""
    objectives = {o.id: o for o in graph.objectives}
    pending: dict[str, set[str]] = {oid: set() for oid in objectives}
    dependants: dict[str, set[str]] = {}
    for link in graph.contributions:
        if link.source in objectives and link.target in objectives:
            pending[link.target].add(link.source)
            dependants.setdefault(link.source, set()).add(link.target)
    ready = sorted(oid for oid, deps in pending.items() if not deps)
    order: list[Objective] = []
    while ready:
        oid = ready.pop(0)
        order.append(objectives[oid])
        released = []
        for succ in dependants.get(oid, ()):
            pending[succ].discard(oid)
            if not pending[succ]:
                released.append(succ)
        if released:
            ready = sorted(ready + released)
    if len(order) != len(objectives):
        raise ModelError(
            [Diagnostic(Severity.ERROR, "cycle", "contribution edges contain a cycle", "")]
        )
    return order


def _propagate(graph: GoalGraph, options: EvalOptions) -> _Propagation:
    _check_selection(graph, options)
    satisfaction: dict[str, Fraction] = {}
    for req in graph.requirements:
        satisfaction[req.id] = ONE if req.included else ZERO

    counted: dict[str, tuple[ContributionLink, ...]] = {}
    unresolved: dict[str, tuple[str, ...]] = {}
    order = _objective_order(graph)

    for objective in order:
        incoming = graph.contributions_into.get(objective.id, ())
        kept = [l for l in incoming if l.combinator is not Combinator.OR]
        groups: dict[str, list[ContributionLink]] = {}
        for link in incoming:
            if link.or_group is not None:
                groups.setdefault(link.or_group, []).append(link)
        open_groups: list[str] = []
        for group in sorted(groups):
            members = sorted(groups[group], key=lambda l: l.id)
            if options.or_policy is OrPolicy.PESSIMISTIC:
                open_groups.append(group)
                continue
            selected = options.or_selection.get(group)
            if selected is not None:
                kept.append(next(l for l in members if l.id == selected))
            elif options.or_policy is OrPolicy.BEST_ADJUSTED:
                # members ascend by id, and max() keeps the first of equals,
                # so ties go to the lexicographically smallest link id
                best = max(
                    members,
                    key=lambda l: Fraction(l.amount.value)
                    * _effective_confidence(graph, l, options)
                    * satisfaction.get(l.source, ZERO),
                )
                kept.append(best)
            else:
                open_groups.append(group)
        kept.sort(key=lambda l: l.id)
        counted[objective.id] = tuple(kept)
        if open_groups:
            unresolved[objective.id] = tuple(open_groups)

        magnitude = Fraction(objective.magnitude.value)
        raw = sum(
            (Fraction(l.amount.value) * satisfaction.get(l.source, ZERO) for l in kept),
            ZERO,
        )
        satisfaction[objective.id] = min(ONE, raw / magnitude)
    return _Propagation(satisfaction, counted, unresolved, order)


def evaluate(graph: GoalGraph, options: EvalOptions | None = None) -> EvaluationResult:
    """Compute per-objective sums, fractions and statuses.

    Refuses graphs with error diagnostics; validation warnings ride along
    in the result.
    """
    options = options or EvalOptions()
    diagnostics = validate(graph)
    errors = [d for d in diagnostics if d.severity is Severity.ERROR]
    if errors:
        raise ModelError(errors)
    warnings = tuple(d for d in diagnostics if d.severity is Severity.WARNING)

    prop = _propagate(graph, options)
    statuses: dict[str, Status] = {}
    outcomes: dict[str, ObjectiveOutcome] = {}

    for objective in prop.order:
        oid = objective.id
        magnitude = Fraction(objective.magnitude.value)
        raw = ZERO
        adjusted = ZERO
        for link in prop.counted[oid]:
            source_sat = prop.satisfaction.get(link.source, ZERO)
            raw += Fraction(link.amount.value) * source_sat
            adjusted += (
                Fraction(link.amount.value)
                * _effective_confidence(graph, link, options)
                * source_sat
            )

        if oid in prop.unresolved:
            status = Status.UNDETERMINED
        elif any(
            _and_source_unsatisfied(graph, link, prop.satisfaction, statuses)
            for link in prop.counted[oid]
        ):
            status = Status.UNSATISFIED
        elif raw < magnitude:
            status = Status.UNSATISFIED
        elif adjusted < magnitude:
            status = Status.IN_DOUBT
        else:
            status = Status.SATISFIED
        statuses[oid] = status
        outcomes[oid] = ObjectiveOutcome(
            objective=oid,
            raw_sum=raw,
            adjusted_sum=adjusted,
            raw_fraction=min(ONE, raw / magnitude),
            adjusted_fraction=min(ONE, adjusted / magnitude),
            status=status,
        )

    ordered = {oid: outcomes[oid] for oid in sorted(outcomes)}
    return EvaluationResult(outcomes=ordered, options=options, warnings=warnings)


def _and_source_unsatisfied(
    graph: GoalGraph,
    link: ContributionLink,
    satisfaction: dict[str, Fraction],
    statuses: dict[str, Status],
) -> bool:
    """AND links gate hard: an unsatisfied source sinks the target."""
    if link.combinator is not Combinator.AND:
        return False
    source = graph.node_by_id[link.source]
    if isinstance(source, Requirement):
        return not source.included
    return satisfaction[link.source] == 0 or statuses.get(link.source) is Status.UNSATISFIED


# --- path enumeration and chain summaries -------------------------------------


def _traversable(
    graph: GoalGraph, allowed: set[str] | None, decompositions: bool
) -> dict[str, list[tuple[str, str]]]:
    """Outgoing (link id, head) lists per node, decomposition walked parent->child."""
    out: dict[str, list[tuple[str, str]]] = {}
    for link in graph.contributions:
        if allowed is None or link.id in allowed:
            out.setdefault(link.source, []).append((link.id, link.target))
    if decompositions:
        for link in graph.decompositions:
            out.setdefault(link.parent, []).append((link.id, link.child))
    for heads in out.values():
        heads.sort()
    return out


def _simple_paths(
    graph: GoalGraph,
    from_id: str,
    to_id: str,
    allowed: set[str] | None,
    decompositions: bool = True,
) -> list[tuple[str, ...]]:
    adjacency = _traversable(graph, allowed, decompositions)
    paths: list[tuple[str, ...]] = []
    trail: list[str] = []
    visited = {from_id}

    def walk(node: str) -> None:
        for link_id, head in adjacency.get(node, ()):
            if head in visited:
                continue
            trail.append(link_id)
            if head == to_id:
                paths.append(tuple(trail))
            else:
                visited.add(head)
                walk(head)
                visited.discard(head)
            trail.pop()

    walk(from_id)
    paths.sort()
    return paths


def enumerate_paths(graph: GoalGraph, from_id: str, to_id: str) -> list[tuple[str, ...]]:
    """All simple directed paths between two nodes, as link-id tuples.

    Contribution edges are walked source to target; decomposition edges
    parent to child (so paths from an abstract requirement run through its
    refinements). Results come back sorted lexicographically by link ids,
    so the order is stable.
    """
    for node_id in (from_id, to_id):
        if node_id not in graph.node_by_id:
            raise ValueError(f"unknown node {node_id!r}")
    if from_id == to_id:
        return []
    return _simple_paths(graph, from_id, to_id, allowed=None)


def summarize_chain(
    graph: GoalGraph, path: Sequence[str], options: EvalOptions | None = None
) -> ChainSummary:
    """Collapse one chain of links into what it delivers at its far end.

    The delivered amount is the final link's amount scaled by each
    intermediate hop's fraction of its objective's magnitude; confidences
    compound multiplicatively. Decomposition hops pass credit through
    unchanged.
    """
    options = options or EvalOptions()
    if not path:
        raise ValueError("empty chain")
    links = []
    for link_id in path:
        link = graph.link_by_id.get(link_id)
        if link is None:
            raise ValueError(f"unknown link {link_id!r}")
        links.append(link)

    position: str | None = None
    contributions: list[ContributionLink] = []
    for link in links:
        if isinstance(link, ContributionLink):
            tail, head = link.source, link.target
            contributions.append(link)
        elif isinstance(link, DecompositionLink):
            if contributions:
                raise ValueError(
                    f"decomposition link {link.id!r} cannot follow a contribution link"
                )
            tail, head = link.parent, link.child
        else:
            raise ValueError(f"trace link {link.id!r} cannot appear in a chain")
        if position is not None and tail != position:
            raise ValueError(f"link {link.id!r} does not continue the chain at {position!r}")
        position = head
    if not contributions:
        raise ValueError("chain must end at an objective via a contribution link")

    delivered = Fraction(contributions[-1].amount.value)
    confidence = ONE
    for link in contributions[:-1]:
        target = graph.node_by_id[link.target]
        assert isinstance(target, Objective)
        delivered *= Fraction(link.amount.value) / Fraction(target.magnitude.value)
    for link in contributions:
        confidence *= _effective_confidence(graph, link, options)
    return ChainSummary(
        links=tuple(path), delivered_amount=delivered, compound_confidence=confidence
    )


# --- attribution ---------------------------------------------------------------


def _decomposition_descendants(graph: GoalGraph, root: str) -> set[str]:
    seen = {root}
    frontier = [root]
    while frontier:
        node = frontier.pop()
        for link in graph.children_of.get(node, ()):
            if link.child not in seen:
                seen.add(link.child)
                frontier.append(link.child)
    return seen


def attribute(
    graph: GoalGraph,
    requirement_id: str,
    objective_id: str,
    options: EvalOptions | None = None,
) -> Attribution:
    """How much the requirement delivers toward the objective, if satisfied.

    Computed as a linear pro-rated flow over counted contribution links
    (amounts here are never clamped, so attribution stays additive across
    requirements). An excluded requirement still gets its hypothetical
    amounts, with a warning. Chains originating at decomposition
    descendants credit the requirement too.
    """
    options = options or EvalOptions()
    requirement = graph.node_by_id.get(requirement_id)
    if not isinstance(requirement, Requirement):
        raise ValueError(f"unknown requirement {requirement_id!r}")
    objective = graph.node_by_id.get(objective_id)
    if not isinstance(objective, Objective):
        raise ValueError(f"unknown objective {objective_id!r}")
    diagnostics = validate(graph)
    errors = [d for d in diagnostics if d.severity is Severity.ERROR]
    if errors:
        raise ModelError(errors)

    prop = _propagate(graph, options)
    allowed = {l.id for links in prop.counted.values() for l in links}
    seeds = _decomposition_descendants(graph, requirement_id)

    raw_delivered: dict[str, Fraction] = {}
    adj_delivered: dict[str, Fraction] = {}

    def weight(table: dict[str, Fraction], node: str, magnitude_of: dict[str, Fraction]) -> Fraction:
        if node in seeds:
            return ONE
        if node not in table:
            return ZERO
        return table[node] / magnitude_of[node]

    magnitudes = {o.id: Fraction(o.magnitude.value) for o in graph.objectives}
    for target in prop.order:
        raw_total = ZERO
        adj_total = ZERO
        for link in prop.counted[target.id]:
            raw_w = weight(raw_delivered, link.source, magnitudes)
            adj_w = weight(adj_delivered, link.source, magnitudes)
            if raw_w:
                raw_total += Fraction(link.amount.value) * raw_w
            if adj_w:
                adj_total += (
                    Fraction(link.amount.value)
                    * _effective_confidence(graph, link, options)
                    * adj_w
                )
        if raw_total or adj_total:
            raw_delivered[target.id] = raw_total
            adj_delivered[target.id] = adj_total

    raw_amount = raw_delivered.get(objective_id, ZERO)
    adjusted_amount = adj_delivered.get(objective_id, ZERO)
    # one chain per originating descendant: a descendant reachable by several
    # decomposition routes still delivers its contribution exactly once
    chains: list[tuple[str, ...]] = []
    for seed in sorted(seeds):
        chains.extend(
            _simple_paths(graph, seed, objective_id, allowed, decompositions=False)
        )
    chains.sort()
    paths = tuple(summarize_chain(graph, chain, options) for chain in chains)
    warnings: tuple[Diagnostic, ...] = ()
    if not requirement.included:
        warnings = (
            Diagnostic(
                Severity.WARNING,
                "excluded-requirement",
                f"{requirement_id} is excluded; amounts assume it were satisfied",
                requirement_id,
            ),
        )
    return Attribution(
        requirement=requirement_id,
        objective=objective_id,
        raw_amount=raw_amount,
        adjusted_amount=adjusted_amount,
        compound_confidence=(adjusted_amount / raw_amount) if raw_amount else ONE,
        paths=paths,
        warnings=warnings,
    )


def prioritize(
    graph: GoalGraph,
    objective_ids: Iterable[str] | None = None,
    options: EvalOptions | None = None,
) -> list[PriorityRow]:
    """Rank requirements by their mean fractional attribution to the targets.

    Targets default to the top-level objectives. A requirement's score per
    objective is its confidence-adjusted delivery divided by the
    objective's magnitude; the aggregate is the unweighted mean. Value
    density divides the aggregate by estimated effort where present.
    """
    options = options or EvalOptions()
    if objective_ids is None:
        targets = [o.id for o in graph.objectives if o.top_level]
    else:
        targets = list(objective_ids)
        for oid in targets:
            if not isinstance(graph.node_by_id.get(oid), Objective):
                raise ValueError(f"unknown objective {oid!r}")
    if not targets:
        raise ValueError("nothing to prioritise against: no target objectives")

    rows: list[PriorityRow] = []
    for requirement in sorted(graph.requirements, key=lambda r: r.id):
        per_objective: dict[str, Fraction] = {}
        for oid in targets:
            result = attribute(graph, requirement.id, oid, options)
            magnitude = Fraction(graph.node_by_id[oid].magnitude.value)  # type: ignore[union-attr]
            per_objective[oid] = result.adjusted_amount / magnitude
        score = sum(per_objective.values(), ZERO) / len(targets)
        density: Fraction | None = None
        if requirement.effort_hours is not None and requirement.effort_hours > 0:
            density = score / Fraction(requirement.effort_hours)
        rows.append(
            PriorityRow(
                requirement=requirement.id,
                per_objective=per_objective,
                score=score,
                value_density=density,
            )
        )
    rows.sort(key=lambda r: (-r.score, r.requirement))
    return rows
