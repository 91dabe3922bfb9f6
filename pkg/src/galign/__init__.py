"""galign: quantified goal graphs for strategic alignment analysis.

Model software requirements and measurable business objectives as a DAG
of confidence-weighted, metric-translating contribution links; evaluate
objective satisfaction, attribute business value to requirements, and
explore what-if scenarios.
"""

from .advisor import (
    LibraryEntry,
    LibraryError,
    LibraryStore,
    Prompt,
    PromptKind,
    generate_prompts,
)
from .dsl import ParseError, ParseFailure, SourceSpan, parse_model, serialize_model
from .engine import (
    Attribution,
    ChainSummary,
    EvalOptions,
    EvaluationResult,
    ObjectiveOutcome,
    OrPolicy,
    PriorityRow,
    Status,
    attribute,
    enumerate_paths,
    evaluate,
    prioritize,
    summarize_chain,
)
from .export import export_dot, export_json_report, graph_from_dict, graph_to_dict
from .model import (
    Author,
    Combinator,
    ContributionLink,
    DecompositionLink,
    Diagnostic,
    GoalGraph,
    ModelError,
    Objective,
    Quantity,
    Requirement,
    RequirementKind,
    Severity,
    SoftGoal,
    SoftGoalKind,
    TraceLink,
    build_graph,
    render_label,
    validate,
)
from .scenario import (
    DiffReport,
    DiffRow,
    IncludeRequirement,
    Scenario,
    SelectOr,
    SetAmount,
    SetConfidence,
    apply_scenario,
    compare,
    run_whatif,
)

__version__ = "0.1.0"

__all__ = [
    "Attribution",
    "Author",
    "ChainSummary",
    "Combinator",
    "ContributionLink",
    "DecompositionLink",
    "Diagnostic",
    "DiffReport",
    "DiffRow",
    "EvalOptions",
    "EvaluationResult",
    "GoalGraph",
    "IncludeRequirement",
    "LibraryEntry",
    "LibraryError",
    "LibraryStore",
    "ModelError",
    "Objective",
    "ObjectiveOutcome",
    "OrPolicy",
    "ParseError",
    "ParseFailure",
    "PriorityRow",
    "Prompt",
    "PromptKind",
    "Quantity",
    "Requirement",
    "RequirementKind",
    "Scenario",
    "SelectOr",
    "SetAmount",
    "SetConfidence",
    "Severity",
    "SoftGoal",
    "SoftGoalKind",
    "SourceSpan",
    "Status",
    "TraceLink",
    "apply_scenario",
    "attribute",
    "build_graph",
    "compare",
    "enumerate_paths",
    "evaluate",
    "export_dot",
    "export_json_report",
    "generate_prompts",
    "graph_from_dict",
    "graph_to_dict",
    "parse_model",
    "prioritize",
    "render_label",
    "run_whatif",
    "serialize_model",
    "summarize_chain",
    "validate",
]
