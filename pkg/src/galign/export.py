"""Graph exports: Graphviz DOT, the JSON evaluation report, and the JSON
encodings shared by the CLI's --json outputs and the HTTP service.

The CLI and the service must emit byte-identical JSON for the same data,
so every payload is built here and serialized through `to_json`.
"""

from __future__ import annotations

import json
from decimal import Decimal
from fractions import Fraction

from .advisor import LibraryEntry, Prompt, entry_from_json, entry_to_json
from .engine import (
    Attribution,
    EvalOptions,
    EvaluationResult,
    OrPolicy,
    PriorityRow,
)
from .model import (
    Author,
    Combinator,
    ContributionLink,
    DecompositionLink,
    Diagnostic,
    GoalGraph,
    Objective,
    Quantity,
    Requirement,
    RequirementKind,
    SoftGoal,
    SoftGoalKind,
    TraceLink,
    build_graph,
    format_number,
    render_label,
)
from .scenario import DiffReport

STATUS_COLOURS = {
    "satisfied": "palegreen",
    "in_doubt": "gold",
    "unsatisfied": "lightcoral",
    "undetermined": "lightgray",
}


def _num(value) -> float:
    """JSON number for exact internal values (floats carry 17 significant
    digits, comfortably past the six the report promises)."""
    if isinstance(value, Fraction):
        return value.numerator / value.denominator
    return float(value)


def to_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False)


# --- DOT ------------------------------------------------------------------------


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(graph: GoalGraph, evaluation: EvaluationResult | None = None) -> str:
    """Render the graph as a Graphviz digraph.

    Objectives are ellipses labelled with their quantified labels,
    requirements hexagons, soft goals dashed ellipses. With an evaluation,
    objectives are filled with their status colour. Edges carry the
    contribution amount, activity and confidence; AND edges end in `&`,
    OR edges in `|<group>`.
    """
    if evaluation is not None:
        objective_ids = {o.id for o in graph.objectives}
        stray = sorted(set(evaluation.outcomes) - objective_ids)
        if stray:
            raise ValueError(f"evaluation covers unknown objectives: {', '.join(stray)}")

    lines = [f"digraph {_dot_quote(graph.name or 'goal graph')} {{"]
    lines.append("  rankdir=BT;")
    for obj in sorted(graph.objectives, key=lambda o: o.id):
        attrs = ["shape=ellipse", f"label={_dot_quote(render_label(obj))}"]
        if evaluation is not None and obj.id in evaluation.outcomes:
            status = evaluation.outcomes[obj.id].status.value
            attrs.append("style=filled")
            attrs.append(f"fillcolor={STATUS_COLOURS[status]}")
        lines.append(f"  {_dot_quote(obj.id)} [{', '.join(attrs)}];")
    for req in sorted(graph.requirements, key=lambda r: r.id):
        lines.append(
            f"  {_dot_quote(req.id)} [shape=hexagon, label={_dot_quote(render_label(req))}];"
        )
    for goal in sorted(graph.softgoals, key=lambda g: g.id):
        lines.append(
            f"  {_dot_quote(goal.id)} [shape=ellipse, style=dashed, "
            f"label={_dot_quote(goal.statement)}];"
        )
    for link in sorted(graph.contributions, key=lambda l: l.id):
        parts = [str(link.amount)]
        if link.activity:
            parts.append(link.activity)
        parts.append(f"[conf {format_number(link.confidence)}]")
        if link.combinator is Combinator.AND:
            parts.append("&")
        elif link.combinator is Combinator.OR:
            parts.append(f"|{link.or_group}")
        label = " ".join(parts)
        lines.append(
            f"  {_dot_quote(link.source)} -> {_dot_quote(link.target)} "
            f"[label={_dot_quote(label)}];"
        )
    for link in sorted(graph.decompositions, key=lambda l: l.id):
        lines.append(f"  {_dot_quote(link.parent)} -> {_dot_quote(link.child)} [style=dashed];")
    for link in sorted(graph.traces, key=lambda l: l.id):
        lines.append(f"  {_dot_quote(link.source)} -> {_dot_quote(link.target)} [style=dotted];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# --- evaluation report ------------------------------------------------------------


def quantity_dict(quantity: Quantity) -> dict:
    return {"value": _num(quantity.value), "unit": quantity.unit}


def _quantity_from(data: dict) -> Quantity:
    return Quantity(Decimal(str(data["value"])), str(data["unit"]))


def diagnostic_dict(diagnostic: Diagnostic) -> dict:
    return {
        "severity": diagnostic.severity.value,
        "code": diagnostic.code,
        "message": diagnostic.message,
        "subject": diagnostic.subject,
    }


def report_dict(graph: GoalGraph, evaluation: EvaluationResult) -> dict:
    objectives = []
    for obj in sorted(graph.objectives, key=lambda o: o.id):
        outcome = evaluation.outcomes[obj.id]
        objectives.append(
            {
                "id": obj.id,
                "label": render_label(obj),
                "magnitude": quantity_dict(obj.magnitude),
                "raw_sum": _num(outcome.raw_sum),
                "adjusted_sum": _num(outcome.adjusted_sum),
                "raw_fraction": _num(outcome.raw_fraction),
                "adjusted_fraction": _num(outcome.adjusted_fraction),
                "status": outcome.status.value,
            }
        )
    requirements = [
        {
            "id": req.id,
            "label": render_label(req),
            "included": req.included,
            "effort_hours": None if req.effort_hours is None else _num(req.effort_hours),
        }
        for req in sorted(graph.requirements, key=lambda r: r.id)
    ]
    return {
        "model": graph.name,
        "objectives": objectives,
        "requirements": requirements,
        "diagnostics": [diagnostic_dict(d) for d in evaluation.warnings],
    }


def export_json_report(graph: GoalGraph, evaluation: EvaluationResult) -> str:
    return to_json(report_dict(graph, evaluation))


# --- other payloads ----------------------------------------------------------------


def attribution_dict(graph: GoalGraph, attribution: Attribution) -> dict:
    objective = graph.node_by_id[attribution.objective]
    assert isinstance(objective, Objective)
    return {
        "requirement": attribution.requirement,
        "objective": attribution.objective,
        "unit": objective.magnitude.unit,
        "raw_amount": _num(attribution.raw_amount),
        "adjusted_amount": _num(attribution.adjusted_amount),
        "compound_confidence": _num(attribution.compound_confidence),
        "paths": [
            {
                "links": list(path.links),
                "delivered_amount": _num(path.delivered_amount),
                "compound_confidence": _num(path.compound_confidence),
            }
            for path in attribution.paths
        ],
        "warnings": [diagnostic_dict(d) for d in attribution.warnings],
    }


def priorities_dict(graph: GoalGraph, targets: list[str], rows: list[PriorityRow]) -> dict:
    return {
        "objectives": targets,
        "ranking": [
            {
                "requirement": row.requirement,
                "label": render_label(graph.node_by_id[row.requirement]),
                "per_objective": {oid: _num(f) for oid, f in sorted(row.per_objective.items())},
                "score": _num(row.score),
                "value_density": None if row.value_density is None else _num(row.value_density),
            }
            for row in rows
        ],
    }


def outcome_dict(outcome) -> dict:
    return {
        "raw_sum": _num(outcome.raw_sum),
        "adjusted_sum": _num(outcome.adjusted_sum),
        "raw_fraction": _num(outcome.raw_fraction),
        "adjusted_fraction": _num(outcome.adjusted_fraction),
        "status": outcome.status.value,
    }


def diff_dict(report: DiffReport) -> dict:
    return {
        "objectives": [
            {
                "id": row.objective,
                "baseline": outcome_dict(row.baseline),
                "scenario": outcome_dict(row.scenario),
                "status_changed": row.status_changed,
                "delta_raw": _num(row.delta_raw),
                "delta_adjusted": _num(row.delta_adjusted),
            }
            for row in report.rows
        ],
        "transitions": dict(report.transitions),
        "changed_count": len(report.changed),
    }


def prompts_dict(prompts: list[Prompt]) -> dict:
    return {
        "prompts": [
            {
                "subject": prompt.subject,
                "kind": prompt.kind.value,
                "question": prompt.question,
                "gap": None if prompt.gap is None else quantity_dict(prompt.gap),
            }
            for prompt in prompts
        ]
    }


def diagnostics_dict(diagnostics) -> dict:
    return {"diagnostics": [diagnostic_dict(d) for d in diagnostics]}


def library_dict(entries: list[LibraryEntry]) -> dict:
    return {"entries": [entry_to_json(e) for e in entries]}


def options_from_dict(data: dict) -> EvalOptions:
    return EvalOptions(
        use_confidence=bool(data.get("use_confidence", True)),
        use_calibration=bool(data.get("use_calibration", True)),
        or_policy=OrPolicy(data.get("or_policy", "explicit")),
        or_selection={str(k): str(v) for k, v in (data.get("or_selection") or {}).items()},
    )


# --- whole-model JSON ---------------------------------------------------------------


def graph_to_dict(graph: GoalGraph) -> dict:
    """Whole-model JSON; the DSL file stays the authoritative format."""
    return {
        "name": graph.name,
        "authors": [
            {
                "id": a.id,
                "name": a.name,
                "role": a.role,
                "calibration": _num(a.calibration),
            }
            for a in sorted(graph.authors, key=lambda a: a.id)
        ],
        "softgoals": [
            {"id": g.id, "kind": g.kind.value, "statement": g.statement}
            for g in sorted(graph.softgoals, key=lambda g: g.id)
        ],
        "objectives": [
            {
                "id": o.id,
                "activity": o.activity,
                "object": o.object,
                "focus": o.focus,
                "magnitude": quantity_dict(o.magnitude),
                "scale": o.scale,
                "timeframe": o.timeframe,
                "scope": o.scope,
                "author": o.author,
                "top_level": o.top_level,
                "label": render_label(o),
            }
            for o in sorted(graph.objectives, key=lambda o: o.id)
        ],
        "requirements": [
            {
                "id": r.id,
                "kind": r.kind.value,
                "headline": r.headline,
                "description": r.description,
                "rationale": r.rationale,
                "fit_criterion": r.fit_criterion,
                "effort_hours": None if r.effort_hours is None else _num(r.effort_hours),
                "included": r.included,
                "label": render_label(r),
            }
            for r in sorted(graph.requirements, key=lambda r: r.id)
        ],
        "contributions": [
            {
                "id": l.id,
                "source": l.source,
                "target": l.target,
                "amount": quantity_dict(l.amount),
                "activity": l.activity,
                "confidence": _num(l.confidence),
                "combinator": l.combinator.value,
                "or_group": l.or_group,
                "author": l.author,
            }
            for l in sorted(graph.contributions, key=lambda l: l.id)
        ],
        "decompositions": [
            {"id": l.id, "parent": l.parent, "child": l.child}
            for l in sorted(graph.decompositions, key=lambda l: l.id)
        ],
        "traces": [
            {"id": l.id, "source": l.source, "target": l.target}
            for l in sorted(graph.traces, key=lambda l: l.id)
        ],
    }


def graph_from_dict(data: dict) -> GoalGraph:
    """Build a checked graph from the JSON shape `graph_to_dict` emits."""
    nodes: list = []
    for o in data.get("objectives", ()):
        nodes.append(
            Objective(
                id=str(o["id"]),
                activity=str(o.get("activity", "")),
                object=str(o.get("object", "")),
                focus=str(o.get("focus", "")),
                magnitude=_quantity_from(o["magnitude"]),
                scale=str(o.get("scale", "")),
                timeframe=str(o.get("timeframe", "")),
                scope=str(o.get("scope", "")),
                author=o.get("author"),
                top_level=bool(o.get("top_level", False)),
            )
        )
    for r in data.get("requirements", ()):
        nodes.append(
            Requirement(
                id=str(r["id"]),
                kind=RequirementKind(r.get("kind", "F")),
                headline=str(r.get("headline", "")),
                description=str(r.get("description", "")),
                rationale=str(r.get("rationale", "")),
                fit_criterion=str(r.get("fit_criterion", "")),
                effort_hours=(
                    None if r.get("effort_hours") is None else Decimal(str(r["effort_hours"]))
                ),
                included=bool(r.get("included", True)),
            )
        )
    for g in data.get("softgoals", ()):
        nodes.append(
            SoftGoal(id=str(g["id"]), kind=SoftGoalKind(g.get("kind", "goal")), statement=str(g.get("statement", "")))
        )
    authors = [
        Author(
            id=str(a["id"]),
            name=str(a.get("name", "")),
            role=str(a.get("role", "")),
            calibration=Decimal(str(a.get("calibration", 1))),
        )
        for a in data.get("authors", ())
    ]
    links: list = []
    for l in data.get("contributions", ()):
        links.append(
            ContributionLink(
                id=str(l["id"]),
                source=str(l["source"]),
                target=str(l["target"]),
                amount=_quantity_from(l["amount"]),
                activity=str(l.get("activity", "")),
                confidence=Decimal(str(l["confidence"])),
                combinator=Combinator(l.get("combinator", "independent")),
                or_group=l.get("or_group"),
                author=l.get("author"),
            )
        )
    for l in data.get("decompositions", ()):
        parent, child = str(l["parent"]), str(l["child"])
        links.append(DecompositionLink(id=str(l.get("id") or f"dec_{parent}_{child}"), parent=parent, child=child))
    for l in data.get("traces", ()):
        source, target = str(l["source"]), str(l["target"])
        links.append(TraceLink(id=str(l.get("id") or f"trace_{source}_{target}"), source=source, target=target))
    return build_graph(nodes, authors, links, name=str(data.get("name", "")))


def library_entry_from_dict(data: dict) -> LibraryEntry:
    return entry_from_json(data)
