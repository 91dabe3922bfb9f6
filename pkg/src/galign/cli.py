"""Command-line interface.

Thin argument handling over the core package; every analysis prints
either a human-readable table or, with --json, exactly the payload the
HTTP service would return. Exit codes: 0 success, 1 validation or
evaluation failure, 2 usage errors (including a missing model file).
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from datetime import date
from decimal import Decimal, InvalidOperation
from pathlib import Path

from .advisor import LibraryEntry, LibraryError, LibraryStore, generate_prompts
from .dsl import ParseFailure, parse_model
from .engine import EvalOptions, OrPolicy, attribute, evaluate, prioritize
from .export import (
    attribution_dict,
    diagnostics_dict,
    diff_dict,
    export_dot,
    export_json_report,
    library_dict,
    priorities_dict,
    prompts_dict,
    to_json,
)
from .model import (
    GoalGraph,
    ModelError,
    Quantity,
    Severity,
    format_number,
    render_label,
    validate,
)
from .scenario import IncludeRequirement, Scenario, SelectOr, SetAmount, SetConfidence, run_whatif

DEFAULT_LIBRARY = Path.home() / ".galign" / "library.jsonl"

_QUANTITY_RE = re.compile(r"\s*(\d+(?:\.\d+)?)\s*(%|[A-Za-z_][A-Za-z0-9_-]*)\s*\Z")


class CliError(Exception):
    def __init__(self, message: str, exit_code: int = 1):
        self.exit_code = exit_code
        super().__init__(message)


def parse_quantity_arg(text: str) -> Quantity:
    match = _QUANTITY_RE.match(text)
    if not match:
        raise CliError(f"malformed quantity {text!r} (expected e.g. '80%' or '3 months')", 2)
    value, unit = match.groups()
    return Quantity(Decimal(value), unit)


def parse_assignment(text: str, flag: str) -> tuple[str, str]:
    if "=" not in text:
        raise CliError(f"{flag} expects KEY=VALUE, got {text!r}", 2)
    key, value = text.split("=", 1)
    if not key:
        raise CliError(f"{flag} expects KEY=VALUE, got {text!r}", 2)
    return key, value


def load_graph(path: str) -> GoalGraph:
    file_path = Path(path)
    if not file_path.exists():
        raise CliError(f"model file not found: {path}", 2)
    text = file_path.read_text(encoding="utf-8")
    try:
        return parse_model(text)
    except ParseFailure as exc:
        lines = [f"{path}:{e.span.line}:{e.span.column}: {e.message}" for e in exc.errors]
        raise CliError("\n".join(lines), 1)


def eval_options(args) -> EvalOptions:
    selection = {}
    for item in args.select or ():
        group, link = parse_assignment(item, "--select")
        selection[group] = link
    policy = {
        "explicit": OrPolicy.EXPLICIT,
        "best": OrPolicy.BEST_ADJUSTED,
        "pessimistic": OrPolicy.PESSIMISTIC,
    }[args.or_policy]
    return EvalOptions(
        use_confidence=not args.no_confidence,
        use_calibration=not args.no_calibration,
        or_policy=policy,
        or_selection=selection,
    )


def add_eval_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--no-confidence", action="store_true", help="ignore confidence levels")
    parser.add_argument("--no-calibration", action="store_true", help="ignore author calibration")
    parser.add_argument(
        "--or-policy", choices=("explicit", "best", "pessimistic"), default="explicit"
    )
    parser.add_argument(
        "--select", action="append", metavar="GROUP=LINK", help="choose an OR alternative"
    )


def library_path(args) -> Path:
    if getattr(args, "library", None):
        return Path(args.library)
    env = os.environ.get("GALIGN_LIBRARY")
    if env:
        return Path(env)
    return DEFAULT_LIBRARY


def status_text(status) -> str:
    return status.value.replace("_", "-")


def amount_text(value, unit: str) -> str:
    number = f"{float(value):.6g}"
    return f"{number}%" if unit == "%" else f"{number} {unit}"


# --- commands -------------------------------------------------------------------


def cmd_validate(args) -> int:
    file_path = Path(args.file)
    if not file_path.exists():
        raise CliError(f"model file not found: {args.file}", 2)
    from .dsl import parse_document
    from .model import GoalGraph as Graph

    doc = parse_document(file_path.read_text(encoding="utf-8"))
    if doc.errors:
        if args.json:
            payload = {
                "parse_errors": [
                    {
                        "line": e.span.line,
                        "column": e.span.column,
                        "length": e.span.length,
                        "message": e.message,
                        "snippet": e.snippet,
                    }
                    for e in doc.errors
                ],
                "diagnostics": [],
            }
            print(to_json(payload))
        else:
            for error in doc.errors:
                print(f"{args.file}:{error.span.line}:{error.span.column}: {error.message}")
                if error.snippet:
                    print(f"  | {error.snippet}")
        return 1
    graph = Graph(
        name=doc.name,
        nodes=tuple(sorted(doc.nodes, key=lambda n: n.id)),
        authors=tuple(sorted(doc.authors, key=lambda a: a.id)),
        links=tuple(sorted(doc.links, key=lambda l: l.id)),
    )
    diagnostics = validate(graph)
    if args.json:
        payload = {"parse_errors": []}
        payload.update(diagnostics_dict(diagnostics))
        print(to_json(payload))
    else:
        for diagnostic in diagnostics:
            print(str(diagnostic))
        errors = sum(1 for d in diagnostics if d.severity is Severity.ERROR)
        warnings = len(diagnostics) - errors
        print(f"{errors} error(s), {warnings} warning(s)")
    return 1 if any(d.severity is Severity.ERROR for d in diagnostics) else 0


def cmd_eval(args) -> int:
    graph = load_graph(args.file)
    try:
        result = evaluate(graph, eval_options(args))
    except (ModelError, ValueError) as exc:
        raise CliError(str(exc), 1)
    if args.json:
        print(export_json_report(graph, result))
        return 0
    print(f"model: {graph.name}")
    header = f"{'objective':<12} {'label':<64} {'raw':>10} {'adjusted':>10}  status"
    print(header)
    print("-" * len(header))
    for oid, outcome in result.outcomes.items():
        label = render_label(graph.node_by_id[oid])
        print(
            f"{oid:<12} {label:<64} {float(outcome.raw_sum):>10.2f} "
            f"{float(outcome.adjusted_sum):>10.2f}  {status_text(outcome.status)}"
        )
    for warning in result.warnings:
        print(f"warning[{warning.code}] {warning.subject}: {warning.message}")
    return 0


def cmd_attribute(args) -> int:
    graph = load_graph(args.file)
    try:
        result = attribute(graph, args.from_id, args.to_id, eval_options(args))
    except ModelError as exc:
        raise CliError(str(exc), 1)
    except ValueError as exc:
        raise CliError(str(exc), 1)
    if args.json:
        print(to_json(attribution_dict(graph, result)))
        return 0
    objective = graph.node_by_id[args.to_id]
    unit = objective.magnitude.unit
    print(f"{args.from_id} -> {args.to_id}")
    print(f"  raw:        {amount_text(result.raw_amount, unit)}")
    print(f"  adjusted:   {amount_text(result.adjusted_amount, unit)}")
    print(f"  confidence: {float(result.compound_confidence):.4f}")
    for path in result.paths:
        chain = " > ".join(path.links)
        print(
            f"  path {chain}: delivers {amount_text(path.delivered_amount, unit)} "
            f"at confidence {float(path.compound_confidence):.4f}"
        )
    for warning in result.warnings:
        print(f"warning[{warning.code}] {warning.subject}: {warning.message}")
    return 0


def cmd_prioritize(args) -> int:
    graph = load_graph(args.file)
    targets = None
    if args.objectives:
        targets = [t for t in args.objectives.split(",") if t]
    try:
        rows = prioritize(graph, targets, eval_options(args))
    except (ModelError, ValueError) as exc:
        raise CliError(str(exc), 1)
    resolved = targets or [o.id for o in graph.objectives if o.top_level]
    if args.json:
        print(to_json(priorities_dict(graph, resolved, rows)))
        return 0
    print(f"targets: {', '.join(resolved)}")
    header = f"{'rank':<5} {'requirement':<14} {'score':>10} {'value/hour':>12}"
    print(header)
    print("-" * len(header))
    for rank, row in enumerate(rows, start=1):
        density = "-" if row.value_density is None else f"{float(row.value_density):.6f}"
        print(f"{rank:<5} {row.requirement:<14} {float(row.score):>10.4f} {density:>12}")
    return 0


def cmd_whatif(args) -> int:
    graph = load_graph(args.file)
    overrides = []
    for item in args.set_confidence or ():
        link, value = parse_assignment(item, "--set-confidence")
        try:
            overrides.append(SetConfidence(link, Decimal(value)))
        except InvalidOperation:
            raise CliError(f"--set-confidence {item!r}: bad number", 2)
    for item in args.set_amount or ():
        link, value = parse_assignment(item, "--set-amount")
        overrides.append(SetAmount(link, parse_quantity_arg(value)))
    for requirement in args.exclude or ():
        overrides.append(IncludeRequirement(requirement, False))
    for item in args.select_override or ():
        group, link = parse_assignment(item, "--select")
        overrides.append(SelectOr(group, link))
    scenario = Scenario(name=args.name or "cli scenario", overrides=tuple(overrides))
    options = EvalOptions(
        use_confidence=not args.no_confidence, use_calibration=not args.no_calibration
    )
    try:
        report = run_whatif(graph, scenario, options)
    except (ModelError, ValueError) as exc:
        raise CliError(str(exc), 1)
    if args.json:
        print(to_json(diff_dict(report)))
        return 0
    header = f"{'objective':<12} {'baseline':>12} {'scenario':>12} {'delta':>10}  status"
    print(header)
    print("-" * len(header))
    for row in report.rows:
        arrow = (
            f"{status_text(row.baseline.status)} -> {status_text(row.scenario.status)}"
            if row.status_changed
            else status_text(row.scenario.status)
        )
        print(
            f"{row.objective:<12} {float(row.baseline.adjusted_sum):>12.2f} "
            f"{float(row.scenario.adjusted_sum):>12.2f} {float(row.delta_adjusted):>10.2f}  {arrow}"
        )
    if report.transitions:
        summary = ", ".join(f"{k}: {v}" for k, v in report.transitions.items())
        print(f"transitions: {summary}")
    else:
        print("transitions: none")
    return 0


def cmd_prompts(args) -> int:
    graph = load_graph(args.file)
    prompts = generate_prompts(graph)
    if args.json:
        print(to_json(prompts_dict(prompts)))
        return 0
    if not prompts:
        print("no prompts; the model is fully linked and specified")
        return 0
    for prompt in prompts:
        print(f"{prompt.subject} [{prompt.kind.value.replace('_', '-')}] {prompt.question}")
    return 0


def cmd_export_dot(args) -> int:
    graph = load_graph(args.file)
    evaluation = None
    if args.with_eval:
        try:
            evaluation = evaluate(graph)
        except ModelError as exc:
            raise CliError(str(exc), 1)
    text = export_dot(graph, evaluation)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_export_json(args) -> int:
    graph = load_graph(args.file)
    try:
        result = evaluate(graph)
    except ModelError as exc:
        raise CliError(str(exc), 1)
    text = export_json_report(graph, result)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def cmd_library(args) -> int:
    store = LibraryStore(library_path(args))
    if args.library_command == "add":
        entries = store.entries()
        entry_id = args.id or f"e{len(entries) + 1}"
        entry = LibraryEntry(
            id=entry_id,
            project=args.project or "",
            activity=args.activity or "",
            focus=args.focus or "",
            scale=args.scale or "",
            estimated=parse_quantity_arg(args.estimated),
            confidence=Decimal(args.confidence),
            author=args.author or "",
            recorded_at=args.recorded_at or date.today().isoformat(),
            actual=parse_quantity_arg(args.actual) if args.actual else None,
        )
        try:
            store.add(entry)
        except LibraryError as exc:
            raise CliError(str(exc), 1)
        print(f"added {entry_id}")
        return 0
    if args.library_command == "query":
        hits = store.query(args.text or "")
        if args.json:
            print(to_json(library_dict(hits)))
            return 0
        for entry in hits:
            actual = f" actual {entry.actual}" if entry.actual else ""
            print(
                f"{entry.id} [{entry.recorded_at}] {entry.focus} ({entry.scale}): "
                f"estimated {entry.estimated} conf {format_number(entry.confidence)}"
                f"{actual} by {entry.author}"
            )
        if not hits:
            print("no matching entries")
        return 0
    if args.library_command == "suggest":
        suggestion = store.suggest_calibration(args.author)
        if suggestion is None:
            print(f"no outcome-bearing entries for {args.author!r}")
            return 0
        print(f"suggested calibration for {args.author}: {format_number(suggestion)}")
        return 0
    raise CliError("unknown library command", 2)


def cmd_serve(args) -> int:
    import uvicorn

    from .api import ServerState, create_app, empty_graph

    graph = load_graph(args.file) if args.file else empty_graph()
    library = LibraryStore(library_path(args))
    ui_dir = Path(__file__).resolve().parent.parent.parent / "frontend" / "dist"
    state = ServerState(graph, library)
    app = create_app(state, ui_dir=ui_dir)
    port = args.port or int(os.environ.get("GALIGN_PORT", DEFAULT_PORT))
    uvicorn.run(app, host=args.bind, port=port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="galign",
        description="Quantified goal-graph modelling and strategic alignment analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a model file")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("eval", help="evaluate objective satisfaction")
    p.add_argument("file")
    add_eval_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("attribute", help="requirement-to-objective value attribution")
    p.add_argument("file")
    p.add_argument("--from", dest="from_id", required=True, metavar="REQ")
    p.add_argument("--to", dest="to_id", required=True, metavar="OBJ")
    add_eval_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_attribute)

    p = sub.add_parser("prioritize", help="rank requirements by delivered value")
    p.add_argument("file")
    p.add_argument("--objectives", metavar="ID,ID")
    add_eval_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_prioritize)

    p = sub.add_parser("whatif", help="compare a scenario against the baseline")
    p.add_argument("file")
    p.add_argument("--name")
    p.add_argument("--set-confidence", action="append", metavar="LINK=VALUE")
    p.add_argument("--set-amount", action="append", metavar="LINK=QUANTITY")
    p.add_argument("--exclude", action="append", metavar="REQ")
    p.add_argument("--select", dest="select_override", action="append", metavar="GROUP=LINK")
    p.add_argument("--no-confidence", action="store_true")
    p.add_argument("--no-calibration", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_whatif)

    p = sub.add_parser("prompts", help="prompt questions for under-specified elements")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_prompts)

    p = sub.add_parser("export-dot", help="Graphviz DOT export")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.add_argument("--with-eval", action="store_true")
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("export-json", help="JSON evaluation report")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export_json)

    p = sub.add_parser("library", help="past-estimate library")
    p.add_argument("--library", metavar="PATH")
    lib_sub = p.add_subparsers(dest="library_command", required=True)
    add_p = lib_sub.add_parser("add")
    add_p.add_argument("--id")
    add_p.add_argument("--project")
    add_p.add_argument("--activity")
    add_p.add_argument("--focus")
    add_p.add_argument("--scale")
    add_p.add_argument("--estimated", required=True, metavar="QUANTITY")
    add_p.add_argument("--confidence", default="1")
    add_p.add_argument("--author")
    add_p.add_argument("--actual", metavar="QUANTITY")
    add_p.add_argument("--recorded-at", dest="recorded_at", metavar="DATE")
    query_p = lib_sub.add_parser("query")
    query_p.add_argument("text", nargs="?")
    query_p.add_argument("--json", action="store_true")
    suggest_p = lib_sub.add_parser("suggest")
    suggest_p.add_argument("--author", required=True)
    p.set_defaults(func=cmd_library)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("file", nargs="?")
    p.add_argument("--port", type=int)
    p.add_argument("--bind", default="127.0.0.1")
    p.add_argument("--library", metavar="PATH")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.exit_code
    except InvalidOperation as exc:
        print(f"bad number: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
