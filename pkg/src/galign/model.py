"""Goal-graph data model: nodes, links, construction and validation.

A goal graph relates software requirements to measurable business
objectives through quantified, confidence-weighted contribution links.
Soft goals (goal/vision/mission statements) hang off objectives through
unweighted trace links and never take part in any arithmetic.

Graphs are immutable once built; every edit produces a new graph.
`build_graph` refuses structurally broken input and reports *all*
error-level diagnostics at once; `validate` re-derives the same errors
plus advisory warnings on any graph, however it was constructed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from enum import Enum
from functools import cached_property
from typing import Iterable, Union

ID_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*\Z")

PERCENT = "%"

#: Confidence levels with an agreed meaning; anything else is legal but warned.
CANONICAL_CONFIDENCES = (
    Decimal("0.25"),
    Decimal("0.5"),
    Decimal("0.75"),
    Decimal("1"),
)


def format_number(value: Decimal) -> str:
    """Render a decimal without exponent notation or trailing zeros."""
    if value == value.to_integral_value():
        return str(value.quantize(Decimal(1)))
    return format(value.normalize(), "f")


@dataclass(frozen=True)
class Quantity:
    """An amount on some scale: a percentage or an absolute unit ("months").

    Percentages may exceed 100 (increase-type objectives allow it).
    """

    value: Decimal
    unit: str = PERCENT

    @property
    def is_percent(self) -> bool:
        return self.unit == PERCENT

    def compatible_with(self, other: Quantity) -> bool:
        """Unit compatibility is exact name equality, case-insensitive and
        trimmed; there is no unit conversion."""
        if self.is_percent or other.is_percent:
            return self.is_percent and other.is_percent
        return self.unit.strip().casefold() == other.unit.strip().casefold()

    def __str__(self) -> str:
        if self.is_percent:
            return f"{format_number(self.value)}%"
        return f"{format_number(self.value)} {self.unit}"


class RequirementKind(str, Enum):
    FUNCTIONAL = "F"
    NON_FUNCTIONAL = "NF"


class SoftGoalKind(str, Enum):
    GOAL = "goal"
    VISION = "vision"
    MISSION = "mission"


class Combinator(str, Enum):
    """How a contribution link combines with its siblings at the target.

    AND links are all required; OR links form named alternative groups of
    which one must be chosen; independent links simply add up.
    """

    INDEPENDENT = "independent"
    AND = "and"
    OR = "or"


@dataclass(frozen=True)
class Objective:
    """A measurable, time-targeted business target.

    The activity is phrased in the past tense ("Reduced") because an
    objective states a desired outcome, not an ongoing action. The
    magnitude is the amount on `scale` that must be achieved.
    """

    id: str
    activity: str
    focus: str
    magnitude: Quantity
    scale: str
    object: str = ""
    timeframe: str = ""
    scope: str = ""
    author: str | None = None
    top_level: bool = False


@dataclass(frozen=True)
class Requirement:
    """A software requirement with a testable fit criterion.

    `included` marks whether evaluation assumes the requirement meets its
    fit criterion (what-if scenarios toggle it). `effort_hours` feeds
    cost-benefit scoring and stays optional.
    """

    id: str
    kind: RequirementKind
    headline: str
    fit_criterion: str
    description: str = ""
    rationale: str = ""
    effort_hours: Decimal | None = None
    included: bool = True


@dataclass(frozen=True)
class SoftGoal:
    """Qualitative goal/vision/mission kept only for traceability."""

    id: str
    kind: SoftGoalKind
    statement: str


@dataclass(frozen=True)
class Author:
    """Someone who supplied estimates; calibration discounts their confidence."""

    id: str
    name: str
    role: str = ""
    calibration: Decimal = Decimal(1)


@dataclass(frozen=True)
class ContributionLink:
    """Quantified effect the source's satisfaction has on the target objective.

    The amount is expressed in the *target's* scale and unit. Confidence
    is a (0,1] credibility multiplier.
    """

    id: str
    source: str
    target: str
    amount: Quantity
    confidence: Decimal
    activity: str = ""
    combinator: Combinator = Combinator.INDEPENDENT
    or_group: str | None = None
    author: str | None = None


@dataclass(frozen=True)
class DecompositionLink:
    """Refines a requirement into a more specific child requirement."""

    id: str
    parent: str
    child: str


@dataclass(frozen=True)
class TraceLink:
    """Unweighted objective-to-softgoal traceability; never evaluated."""

    id: str
    source: str
    target: str


Node = Union[Objective, Requirement, SoftGoal]
Link = Union[ContributionLink, DecompositionLink, TraceLink]


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    subject: str

    def __str__(self) -> str:
        return f"{self.severity.value}[{self.code}] {self.subject}: {self.message}"


class ModelError(Exception):
    """Raised when a graph violates error-level invariants.

    Carries the complete list of error diagnostics, not just the first.
    """

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


@dataclass(frozen=True)
class GoalGraph:
    """Immutable container for nodes, authors and links.

    Construction does not enforce invariants (so `validate` can inspect
    broken graphs); use `build_graph` for checked construction. Node,
    author and link collections are kept sorted by id, so structurally
    equal graphs compare equal.
    """

    name: str
    nodes: tuple[Node, ...]
    authors: tuple[Author, ...]
    links: tuple[Link, ...]

    @cached_property
    def node_by_id(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def author_by_id(self) -> dict[str, Author]:
        return {a.id: a for a in self.authors}

    @cached_property
    def link_by_id(self) -> dict[str, Link]:
        return {l.id: l for l in self.links}

    @cached_property
    def objectives(self) -> tuple[Objective, ...]:
        return tuple(n for n in self.nodes if isinstance(n, Objective))

    @cached_property
    def requirements(self) -> tuple[Requirement, ...]:
        return tuple(n for n in self.nodes if isinstance(n, Requirement))

    @cached_property
    def softgoals(self) -> tuple[SoftGoal, ...]:
        return tuple(n for n in self.nodes if isinstance(n, SoftGoal))

    @cached_property
    def contributions(self) -> tuple[ContributionLink, ...]:
        return tuple(l for l in self.links if isinstance(l, ContributionLink))

    @cached_property
    def decompositions(self) -> tuple[DecompositionLink, ...]:
        return tuple(l for l in self.links if isinstance(l, DecompositionLink))

    @cached_property
    def traces(self) -> tuple[TraceLink, ...]:
        return tuple(l for l in self.links if isinstance(l, TraceLink))

    @cached_property
    def contributions_into(self) -> dict[str, tuple[ContributionLink, ...]]:
        into: dict[str, list[ContributionLink]] = {}
        for link in self.contributions:
            into.setdefault(link.target, []).append(link)
        return {t: tuple(ls) for t, ls in into.items()}

    @cached_property
    def contributions_from(self) -> dict[str, tuple[ContributionLink, ...]]:
        out: dict[str, list[ContributionLink]] = {}
        for link in self.contributions:
            out.setdefault(link.source, []).append(link)
        return {s: tuple(ls) for s, ls in out.items()}

    @cached_property
    def children_of(self) -> dict[str, tuple[DecompositionLink, ...]]:
        kids: dict[str, list[DecompositionLink]] = {}
        for link in self.decompositions:
            kids.setdefault(link.parent, []).append(link)
        return {p: tuple(ls) for p, ls in kids.items()}

    def replace_links(self, links: Iterable[Link]) -> GoalGraph:
        return build_graph(self.nodes, self.authors, links, name=self.name)

    def replace_nodes(self, nodes: Iterable[Node]) -> GoalGraph:
        return build_graph(nodes, self.authors, self.links, name=self.name)


def build_graph(
    nodes: Iterable[Node],
    authors: Iterable[Author] = (),
    links: Iterable[Link] = (),
    name: str = "",
) -> GoalGraph:
    """Construct a graph, raising ModelError unless every invariant holds.

    The raised error carries all error diagnostics found, never just the
    first one.
    """
    graph = GoalGraph(
        name=name,
        nodes=tuple(sorted(nodes, key=lambda n: n.id)),
        authors=tuple(sorted(authors, key=lambda a: a.id)),
        links=tuple(sorted(links, key=lambda l: l.id)),
    )
    errors = [d for d in validate(graph) if d.severity is Severity.ERROR]
    if errors:
        raise ModelError(errors)
    return graph


def validate(graph: GoalGraph) -> list[Diagnostic]:
    """Check every invariant plus advisory rules; never raises.

    Error diagnostics are exactly those that make `build_graph` refuse the
    same input. Warnings flag suspicious but legal modelling: confidence
    values off the canonical scale, objectives whose incoming contribution
    amounts cannot reach the magnitude, and degenerate OR groups.
    """
    errors: list[Diagnostic] = []
    warnings: list[Diagnostic] = []

    def err(code: str, subject: str, message: str) -> None:
        errors.append(Diagnostic(Severity.ERROR, code, message, subject))

    def warn(code: str, subject: str, message: str) -> None:
        warnings.append(Diagnostic(Severity.WARNING, code, message, subject))

    # Identifier shape and per-namespace uniqueness.
    seen_nodes: set[str] = set()
    for node in graph.nodes:
        if not ID_RE.match(node.id):
            err("invalid-id", node.id, f"node id {node.id!r} is not a valid identifier")
        if node.id in seen_nodes:
            err("duplicate-id", node.id, f"duplicate node id {node.id!r}")
        seen_nodes.add(node.id)
    seen_authors: set[str] = set()
    for author in graph.authors:
        if not ID_RE.match(author.id):
            err("invalid-id", author.id, f"author id {author.id!r} is not a valid identifier")
        if author.id in seen_authors:
            err("duplicate-id", author.id, f"duplicate author id {author.id!r}")
        seen_authors.add(author.id)
    seen_links: set[str] = set()
    for link in graph.links:
        if not ID_RE.match(link.id):
            err("invalid-id", link.id, f"link id {link.id!r} is not a valid identifier")
        if link.id in seen_links:
            err("duplicate-id", link.id, f"duplicate link id {link.id!r}")
        seen_links.add(link.id)

    nodes_by_id: dict[str, Node] = {n.id: n for n in graph.nodes}
    node_ids = set(nodes_by_id)
    author_ids = {a.id for a in graph.authors}

    def resolve(subject: str, ref: str) -> Node | None:
        if ref not in nodes_by_id:
            err("dangling-reference", subject, f"references unknown node {ref!r}")
            return None
        return nodes_by_id[ref]

    # Node-level field invariants.
    for node in graph.nodes:
        if isinstance(node, Objective):
            if node.magnitude.value <= 0:
                err("zero-magnitude", node.id, "objective magnitude must be positive")
            for fname in ("activity", "focus", "scale"):
                if not getattr(node, fname).strip():
                    err("empty-field", node.id, f"objective {fname} must be non-empty")
            if node.author is not None and node.author not in author_ids:
                err("dangling-reference", node.id, f"references unknown author {node.author!r}")
        elif isinstance(node, Requirement):
            if not node.fit_criterion.strip():
                err("empty-field", node.id, "requirement fit criterion must be non-empty")
            if node.effort_hours is not None and node.effort_hours < 0:
                err("negative-quantity", node.id, "effort hours must be non-negative")
    for author in graph.authors:
        if not (0 < author.calibration <= 1):
            err("calibration-range", author.id, "calibration must be in (0, 1]")

    # Link endpoints and quantities.
    or_groups: dict[str, list[ContributionLink]] = {}
    for link in graph.links:
        if isinstance(link, ContributionLink):
            source = resolve(link.id, link.source)
            target = resolve(link.id, link.target)
            if isinstance(source, SoftGoal):
                err("softgoal-link", link.id, f"soft goal {link.source!r} cannot source a contribution")
            if isinstance(target, SoftGoal):
                err("softgoal-link", link.id, f"soft goal {link.target!r} cannot receive a contribution")
                target = None
            elif target is not None and not isinstance(target, Objective):
                err("bad-endpoint", link.id, "contribution target must be an objective")
                target = None
            if link.amount.value < 0:
                err("negative-quantity", link.id, "contribution amount must be non-negative")
            if isinstance(target, Objective) and not link.amount.compatible_with(target.magnitude):
                err(
                    "unit-mismatch",
                    link.id,
                    f"amount unit {link.amount.unit!r} is incompatible with "
                    f"{target.id}'s magnitude unit {target.magnitude.unit!r}",
                )
            if not (0 < link.confidence <= 1):
                err("confidence-range", link.id, "confidence must be in (0, 1]")
            elif link.confidence not in CANONICAL_CONFIDENCES:
                warn(
                    "non-canonical-confidence",
                    link.id,
                    f"confidence {format_number(link.confidence)} is not one of "
                    "0.25, 0.5, 0.75, 1",
                )
            if (link.combinator is Combinator.OR) != (link.or_group is not None):
                err("bad-combinator", link.id, "or-group must be set exactly for 'or' links")
            elif link.or_group is not None and not ID_RE.match(link.or_group):
                err("invalid-id", link.id, f"or-group {link.or_group!r} is not a valid identifier")
            elif link.or_group is not None:
                or_groups.setdefault(link.or_group, []).append(link)
            if link.author is not None and link.author not in author_ids:
                err("dangling-reference", link.id, f"references unknown author {link.author!r}")
        elif isinstance(link, DecompositionLink):
            for ref in (link.parent, link.child):
                endpoint = resolve(link.id, ref)
                if endpoint is not None and not isinstance(endpoint, Requirement):
                    err("bad-endpoint", link.id, f"decomposition endpoint {ref!r} must be a requirement")
        elif isinstance(link, TraceLink):
            source = resolve(link.id, link.source)
            if source is not None and not isinstance(source, Objective):
                err("bad-endpoint", link.id, "trace source must be an objective")
            target = resolve(link.id, link.target)
            if target is not None and not isinstance(target, SoftGoal):
                err("bad-endpoint", link.id, "trace target must be a soft goal")

    # OR groups must aim at a single objective, else selection is ambiguous.
    for group, members in sorted(or_groups.items()):
        targets = {l.target for l in members}
        if len(targets) > 1:
            err(
                "or-group-mixed-target",
                group,
                f"or-group {group!r} spans multiple targets: {', '.join(sorted(targets))}",
            )
        elif len(members) < 2:
            warn("small-or-group", group, f"or-group {group!r} has a single member")

    # Acyclicity over contribution + decomposition edges.
    edges: dict[str, list[str]] = {}
    for link in graph.links:
        if isinstance(link, ContributionLink) and link.source in node_ids and link.target in node_ids:
            edges.setdefault(link.source, []).append(link.target)
        elif isinstance(link, DecompositionLink) and link.parent in node_ids and link.child in node_ids:
            edges.setdefault(link.parent, []).append(link.child)
    cycle = _find_cycle(edges)
    if cycle:
        err("cycle", cycle[0], "contribution/decomposition cycle: " + " -> ".join(cycle))

    # Advisory: can the declared contributions ever reach the magnitude?
    incoming_total: dict[str, Decimal] = {}
    for link in graph.contributions:
        if link.target in node_ids:
            incoming_total[link.target] = incoming_total.get(link.target, Decimal(0)) + link.amount.value
    for objective in graph.objectives:
        if objective.magnitude.value <= 0:
            continue
        total = incoming_total.get(objective.id, Decimal(0))
        if total < objective.magnitude.value:
            gap = Quantity(objective.magnitude.value - total, objective.magnitude.unit)
            warn(
                "gap",
                objective.id,
                f"incoming contributions sum to {format_number(total)}, "
                f"leaving a gap of {gap} toward the magnitude",
            )

    errors.sort(key=lambda d: (d.subject, d.code, d.message))
    warnings.sort(key=lambda d: (d.subject, d.code, d.message))
    return errors + warnings


def _find_cycle(edges: dict[str, list[str]]) -> list[str] | None:
    """Return one cycle as a node-id list (smallest entry first), or None."""
    WHITE, GREY, BLACK = 0, 1, 2
    colour: dict[str, int] = {}
    stack: list[str] = []

    def visit(node: str) -> list[str] | None:
        colour[node] = GREY
        stack.append(node)
        for succ in sorted(edges.get(node, ())):
            state = colour.get(succ, WHITE)
            if state == GREY:
                cycle = stack[stack.index(succ):]
                pivot = cycle.index(min(cycle))
                return cycle[pivot:] + cycle[:pivot]
            if state == WHITE:
                found = visit(succ)
                if found:
                    return found
        stack.pop()
        colour[node] = BLACK
        return None

    for start in sorted(edges):
        if colour.get(start, WHITE) == WHITE:
            found = visit(start)
            if found:
                return found
    return None


def render_label(node: Node) -> str:
    """Render the diagram label for an objective or requirement.

    Objectives read `Activity[Object Focus](magnitude)`; requirements read
    `{F}[headline](fit criterion)`. The exact format is normative: DOT
    export and the UI both display these strings verbatim.
    """
    if isinstance(node, Objective):
        subject = " ".join(part for part in (node.object, node.focus) if part)
        return f"{node.activity}[{subject}]({node.magnitude})"
    if isinstance(node, Requirement):
        return f"{{{node.kind.value}}}[{node.headline}]({node.fit_criterion})"
    raise ValueError("no quantified label for soft goals")
