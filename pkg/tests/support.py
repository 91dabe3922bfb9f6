"""Shared test machinery: independent oracles and randomized model generation.

The oracles deliberately avoid the engine's code paths: satisfaction and
status are recomputed by plain recursion (no topological ordering, no
shared counted-link resolution), and attribution is recomputed by a
from-scratch DFS over paths with per-path products. Tests compare engine
output against these.
"""

from __future__ import annotations

import random
import string
from decimal import Decimal
from fractions import Fraction

from galign.engine import EvalOptions, OrPolicy, Status
from galign.model import (
    Author,
    Combinator,
    ContributionLink,
    DecompositionLink,
    GoalGraph,
    Objective,
    Quantity,
    Requirement,
    RequirementKind,
    build_graph,
)

ONE = Fraction(1)
ZERO = Fraction(0)

CANONICAL = (Decimal("0.25"), Decimal("0.5"), Decimal("0.75"), Decimal("1"))


# --- independent recursive evaluation oracle -----------------------------------


def _kappa(graph: GoalGraph, link: ContributionLink, options: EvalOptions) -> Fraction:
    if not options.use_confidence:
        return ONE
    value = Fraction(link.confidence)
    if options.use_calibration and link.author is not None:
        value *= Fraction(graph.author_by_id[link.author].calibration)
    return value


def oracle_evaluate(graph: GoalGraph, options: EvalOptions | None = None):
    """Recursive re-definition of evaluation; returns id -> (raw, adj, status)."""
    options = options or EvalOptions()
    incoming: dict[str, list[ContributionLink]] = {}
    for link in graph.contributions:
        incoming.setdefault(link.target, []).append(link)

    sat_memo: dict[str, Fraction] = {}

    def counted(oid: str) -> tuple[list[ContributionLink], list[str]]:
        kept = [l for l in incoming.get(oid, []) if l.combinator is not Combinator.OR]
        groups: dict[str, list[ContributionLink]] = {}
        for l in incoming.get(oid, []):
            if l.or_group is not None:
                groups.setdefault(l.or_group, []).append(l)
        open_groups: list[str] = []
        for group in sorted(groups):
            members = sorted(groups[group], key=lambda l: l.id)
            if options.or_policy is OrPolicy.PESSIMISTIC:
                open_groups.append(group)
                continue
            chosen = options.or_selection.get(group)
            if chosen is not None:
                kept.extend(l for l in members if l.id == chosen)
            elif options.or_policy is OrPolicy.BEST_ADJUSTED:
                best = None
                best_key = None
                for l in members:
                    key = Fraction(l.amount.value) * _kappa(graph, l, options) * sat(l.source)
                    if best is None or key > best_key:
                        best, best_key = l, key
                kept.append(best)
            else:
                open_groups.append(group)
        return sorted(kept, key=lambda l: l.id), open_groups

    def sat(node_id: str) -> Fraction:
        if node_id in sat_memo:
            return sat_memo[node_id]
        node = graph.node_by_id[node_id]
        if isinstance(node, Requirement):
            value = ONE if node.included else ZERO
        else:
            kept, _ = counted(node_id)
            raw = sum((Fraction(l.amount.value) * sat(l.source) for l in kept), ZERO)
            value = min(ONE, raw / Fraction(node.magnitude.value))
        sat_memo[node_id] = value
        return value

    status_memo: dict[str, Status] = {}

    def status(oid: str) -> Status:
        if oid in status_memo:
            return status_memo[oid]
        node = graph.node_by_id[oid]
        kept, open_groups = counted(oid)
        magnitude = Fraction(node.magnitude.value)
        raw = sum((Fraction(l.amount.value) * sat(l.source) for l in kept), ZERO)
        adj = sum(
            (Fraction(l.amount.value) * _kappa(graph, l, options) * sat(l.source) for l in kept),
            ZERO,
        )
        if open_groups:
            result = Status.UNDETERMINED
        else:
            gated = False
            for l in kept:
                if l.combinator is not Combinator.AND:
                    continue
                source = graph.node_by_id[l.source]
                if isinstance(source, Requirement):
                    if not source.included:
                        gated = True
                elif sat(l.source) == 0 or status(l.source) is Status.UNSATISFIED:
                    gated = True
            if gated or raw < magnitude:
                result = Status.UNSATISFIED
            elif adj < magnitude:
                result = Status.IN_DOUBT
            else:
                result = Status.SATISFIED
        status_memo[oid] = result
        return result

    out = {}
    for objective in graph.objectives:
        kept, _ = counted(objective.id)
        raw = sum((Fraction(l.amount.value) * sat(l.source) for l in kept), ZERO)
        adj = sum(
            (Fraction(l.amount.value) * _kappa(graph, l, options) * sat(l.source) for l in kept),
            ZERO,
        )
        out[objective.id] = (raw, adj, status(objective.id))
    return out


# --- independent attribution oracle --------------------------------------------


def oracle_attribution(
    graph: GoalGraph, requirement_id: str, objective_id: str, options: EvalOptions | None = None
) -> tuple[Fraction, Fraction, list[tuple[str, ...]]]:
    """Path enumeration + per-path products, written from scratch."""
    options = options or EvalOptions()

    sat = {}
    for oid, (raw, _adj, _st) in oracle_evaluate(graph, options).items():
        node = graph.node_by_id[oid]
        sat[oid] = min(ONE, raw / Fraction(node.magnitude.value))
    for req in graph.requirements:
        sat[req.id] = ONE if req.included else ZERO

    # counted links, resolved exactly as the oracle evaluator does
    incoming: dict[str, list[ContributionLink]] = {}
    for link in graph.contributions:
        incoming.setdefault(link.target, []).append(link)
    allowed: set[str] = set()
    for oid in incoming:
        kept = [l for l in incoming[oid] if l.combinator is not Combinator.OR]
        groups: dict[str, list[ContributionLink]] = {}
        for l in incoming[oid]:
            if l.or_group is not None:
                groups.setdefault(l.or_group, []).append(l)
        for group in sorted(groups):
            members = sorted(groups[group], key=lambda l: l.id)
            if options.or_policy is OrPolicy.PESSIMISTIC:
                continue
            chosen = options.or_selection.get(group)
            if chosen is not None:
                kept.extend(l for l in members if l.id == chosen)
            elif options.or_policy is OrPolicy.BEST_ADJUSTED:
                best = None
                best_key = None
                for l in members:
                    key = Fraction(l.amount.value) * _kappa(graph, l, options) * sat.get(l.source, ZERO)
                    if best is None or key > best_key:
                        best, best_key = l, key
                kept.append(best)
        allowed.update(l.id for l in kept)

    outgoing: dict[str, list[ContributionLink]] = {}
    for link in graph.contributions:
        if link.id in allowed:
            outgoing.setdefault(link.source, []).append(link)

    # requirement plus all decomposition descendants seed the search
    seeds = [requirement_id]
    stack = [requirement_id]
    seen = {requirement_id}
    while stack:
        node = stack.pop()
        for dec in graph.decompositions:
            if dec.parent == node and dec.child not in seen:
                seen.add(dec.child)
                seeds.append(dec.child)
                stack.append(dec.child)

    paths: list[list[ContributionLink]] = []

    def dfs(node: str, trail: list[ContributionLink], visited: set[str]) -> None:
        if node == objective_id:
            if trail:
                paths.append(list(trail))
            return
        for link in outgoing.get(node, []):
            if link.target in visited:
                continue
            visited.add(link.target)
            trail.append(link)
            dfs(link.target, trail, visited)
            trail.pop()
            visited.discard(link.target)

    for seed in seeds:
        dfs(seed, [], {seed})

    raw = ZERO
    adjusted = ZERO
    chains: list[tuple[str, ...]] = []
    for chain in paths:
        delivered = Fraction(chain[-1].amount.value)
        for link in chain[:-1]:
            target = graph.node_by_id[link.target]
            delivered *= Fraction(link.amount.value) / Fraction(target.magnitude.value)
        confidence = ONE
        for link in chain:
            confidence *= _kappa(graph, link, options)
        raw += delivered
        adjusted += delivered * confidence
        chains.append(tuple(l.id for l in chain))
    return raw, adjusted, sorted(chains)


# --- randomized model generation ------------------------------------------------

_UNITS = ("%", "months", "hours", "defects")
_TEXT_CHARS = string.ascii_letters + string.digits + " .,;:'!?()[]&\"\\-_/%+"


def random_text(rng: random.Random, max_len: int = 24) -> str:
    body = "".join(rng.choice(_TEXT_CHARS) for _ in range(rng.randint(0, max_len - 1)))
    return rng.choice(string.ascii_letters) + body


def random_money(rng: random.Random, lo: int = 1, hi: int = 400) -> Decimal:
    # quarters keep every value an exact two-decimal literal
    return Decimal(rng.randint(lo, hi)) / 4


def random_graph(
    rng: random.Random,
    max_objectives: int = 6,
    max_requirements: int = 4,
    with_decomposition: bool = True,
    with_or: bool = False,
    with_exclusions: bool = True,
    tree: bool = False,
    uncapped: bool = False,
    rich_text: bool = False,
) -> GoalGraph:
    """Build a random valid goal graph.

    `tree` restricts every node to at most one outgoing contribution link
    (unique chains, no reconvergence) and drops decompositions. `uncapped`
    rescales every magnitude strictly above its incoming amount total, so
    no satisfaction fraction ever clamps.
    """
    n_obj = rng.randint(1, max_objectives)
    n_req = rng.randint(1, max_requirements)

    text = (lambda: random_text(rng)) if rich_text else (lambda: "t")

    authors = []
    if rng.random() < 0.5:
        authors.append(
            Author(
                id="A1",
                name=text() if rich_text else "Alex",
                calibration=Decimal(rng.randint(1, 100)) / 100,
            )
        )

    def maybe_author() -> str | None:
        if authors and rng.random() < 0.3:
            return "A1"
        return None

    units = [rng.choice(_UNITS) for _ in range(n_obj)]
    objectives = [
        Objective(
            id=f"O{i + 1}",
            activity="Reduced",
            object=text() if rich_text else "",
            focus=text(),
            magnitude=Quantity(random_money(rng, 4, 400), units[i]),
            scale=text(),
            timeframe=text() if rng.random() < 0.5 else "",
            author=maybe_author(),
            top_level=(i == n_obj - 1) or rng.random() < 0.2,
        )
        for i in range(n_obj)
    ]
    requirements = [
        Requirement(
            id=f"R{i + 1}",
            kind=rng.choice((RequirementKind.FUNCTIONAL, RequirementKind.NON_FUNCTIONAL)),
            headline=text(),
            fit_criterion=text(),
            rationale=text() if rng.random() < 0.5 else "",
            effort_hours=random_money(rng) if rng.random() < 0.5 else None,
            included=(not with_exclusions) or rng.random() > 0.15,
        )
        for i in range(n_req)
    ]

    links: list = []
    decompositions: list[DecompositionLink] = []
    contributors = list(range(n_req))
    if with_decomposition and not tree and n_req >= 2 and rng.random() < 0.6:
        # a parent refined by later requirements; only leaves contribute
        parent = 0
        children = [i for i in range(1, n_req) if rng.random() < 0.7] or [1]
        for child in children:
            decompositions.append(
                DecompositionLink(f"dec_R{parent + 1}_R{child + 1}", f"R{parent + 1}", f"R{child + 1}")
            )
        contributors = [i for i in range(n_req) if i != parent]

    serial = 0

    def contribution(source: str, target_index: int, combinator=Combinator.INDEPENDENT, group=None):
        nonlocal serial
        serial += 1
        return ContributionLink(
            id=f"L{serial:02d}",
            source=source,
            target=f"O{target_index + 1}",
            amount=Quantity(random_money(rng), units[target_index]),
            confidence=rng.choice(CANONICAL),
            activity="Reduction",
            combinator=combinator,
            or_group=group,
            author=maybe_author(),
        )

    for i in contributors:
        if tree:
            links.append(contribution(f"R{i + 1}", rng.randrange(n_obj)))
        else:
            targets = rng.sample(range(n_obj), k=min(n_obj, rng.randint(1, 2)))
            for t in targets:
                combinator = Combinator.AND if rng.random() < 0.25 else Combinator.INDEPENDENT
                links.append(contribution(f"R{i + 1}", t, combinator))

    for i in range(n_obj - 1):
        if tree:
            if rng.random() < 0.8:
                links.append(contribution(f"O{i + 1}", rng.randint(i + 1, n_obj - 1)))
        else:
            for t in range(i + 1, n_obj):
                if rng.random() < 0.45:
                    combinator = Combinator.AND if rng.random() < 0.2 else Combinator.INDEPENDENT
                    links.append(contribution(f"O{i + 1}", t, combinator))

    if with_or and not tree and n_obj >= 1 and len(requirements) >= 2:
        target_index = n_obj - 1
        for i in range(min(2, n_req)):
            links.append(
                contribution(f"R{i + 1}", target_index, Combinator.OR, group="alt1")
            )

    if uncapped:
        totals: dict[str, Decimal] = {}
        for link in links:
            totals[link.target] = totals.get(link.target, Decimal(0)) + link.amount.value
        objectives = [
            Objective(
                id=o.id,
                activity=o.activity,
                object=o.object,
                focus=o.focus,
                magnitude=Quantity(
                    totals.get(o.id, Decimal(0)) * Decimal("1.25") + Decimal(rng.randint(1, 8)),
                    o.magnitude.unit,
                ),
                scale=o.scale,
                timeframe=o.timeframe,
                author=o.author,
                top_level=o.top_level,
            )
            for o in objectives
        ]

    return build_graph(
        [*objectives, *requirements],
        authors,
        [*links, *decompositions],
        name=random_text(rng, 12) if rich_text else "random model",
    )
