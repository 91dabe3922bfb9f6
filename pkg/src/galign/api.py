"""HTTP service exposing the model, evaluation, attribution, what-if,
prompts, library and export operations.

One model is held at a time as an immutable snapshot. PUT /model swaps
the snapshot atomically after validation, so concurrent reads and
evaluations always see a complete, consistent graph and a rejected PUT
leaves the previous model untouched. Errors use a uniform envelope
`{"error": {"code", "message", "subject"}}` with 400/404/422 statuses.
"""

from __future__ import annotations

import json
import threading
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Literal, Optional

from fastapi import FastAPI, Query, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field, model_validator

from .advisor import LibraryError, LibraryStore, entry_from_json, generate_prompts
from .dsl import ParseFailure, parse_model, serialize_model
from .engine import EvalOptions, OrPolicy, attribute, evaluate, prioritize
from .export import (
    attribution_dict,
    diagnostic_dict,
    diff_dict,
    export_dot,
    export_json_report,
    graph_from_dict,
    graph_to_dict,
    library_dict,
    priorities_dict,
    prompts_dict,
)
from .model import GoalGraph, ModelError, Severity, validate
from .scenario import (
    IncludeRequirement,
    Quantity,
    Scenario,
    SelectOr,
    SetAmount,
    SetConfidence,
    run_whatif,
)

DEFAULT_PORT = 7414


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, subject: str = ""):
        self.status = status
        self.code = code
        self.message = message
        self.subject = subject
        super().__init__(message)


class QuantityBody(BaseModel):
    value: float
    unit: str = "%"

    def to_quantity(self) -> Quantity:
        return Quantity(Decimal(str(self.value)), self.unit)


class EvalOptionsBody(BaseModel):
    use_confidence: bool = True
    use_calibration: bool = True
    or_policy: Literal["explicit", "best", "pessimistic"] = "explicit"
    or_selection: dict[str, str] = Field(default_factory=dict)

    def to_options(self) -> EvalOptions:
        return EvalOptions(
            use_confidence=self.use_confidence,
            use_calibration=self.use_calibration,
            or_policy=OrPolicy(self.or_policy),
            or_selection=dict(self.or_selection),
        )


class SetAmountBody(BaseModel):
    link: str
    value: float
    unit: str = "%"


class SetConfidenceBody(BaseModel):
    link: str
    value: float


class IncludeRequirementBody(BaseModel):
    id: str
    included: bool


class SelectOrBody(BaseModel):
    group: str
    link: str


class OverrideBody(BaseModel):
    set_amount: Optional[SetAmountBody] = None
    set_confidence: Optional[SetConfidenceBody] = None
    include_requirement: Optional[IncludeRequirementBody] = None
    select_or: Optional[SelectOrBody] = None

    @model_validator(mode="after")
    def exactly_one(self):
        present = [
            name
            for name in ("set_amount", "set_confidence", "include_requirement", "select_or")
            if getattr(self, name) is not None
        ]
        if len(present) != 1:
            raise ValueError("an override must set exactly one of the override kinds")
        return self

    def to_override(self):
        if self.set_amount is not None:
            return SetAmount(
                self.set_amount.link,
                Quantity(Decimal(str(self.set_amount.value)), self.set_amount.unit),
            )
        if self.set_confidence is not None:
            return SetConfidence(self.set_confidence.link, Decimal(str(self.set_confidence.value)))
        if self.include_requirement is not None:
            return IncludeRequirement(
                self.include_requirement.id, self.include_requirement.included
            )
        assert self.select_or is not None
        return SelectOr(self.select_or.group, self.select_or.link)


class ScenarioBody(BaseModel):
    name: str = ""
    overrides: list[OverrideBody] = Field(default_factory=list)
    options: Optional[EvalOptionsBody] = None

    def to_scenario(self) -> Scenario:
        return Scenario(
            name=self.name, overrides=tuple(o.to_override() for o in self.overrides)
        )


class LibraryEntryBody(BaseModel):
    id: str
    project: str = ""
    activity: str = ""
    focus: str = ""
    scale: str = ""
    estimated: QuantityBody
    confidence: float = 1.0
    author: str = ""
    recorded_at: str = ""
    actual: Optional[QuantityBody] = None


class ServerState:
    """Current model snapshot plus the shared library store."""

    def __init__(self, graph: GoalGraph, library: LibraryStore | None = None):
        self._graph = graph
        self._lock = threading.Lock()
        self.library = library

    @property
    def graph(self) -> GoalGraph:
        return self._graph

    def swap(self, graph: GoalGraph) -> None:
        with self._lock:
            self._graph = graph


def empty_graph() -> GoalGraph:
    return GoalGraph(name="untitled", nodes=(), authors=(), links=())


def create_app(state: ServerState, ui_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="galign", docs_url=None, redoc_url=None)

    @app.exception_handler(ApiError)
    async def handle_api_error(_request: Request, exc: ApiError):
        payload = {"error": {"code": exc.code, "message": exc.message, "subject": exc.subject}}
        return JSONResponse(payload, status_code=exc.status)

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(_request: Request, exc: RequestValidationError):
        message = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()
        )
        payload = {"error": {"code": "malformed-body", "message": message, "subject": ""}}
        return JSONResponse(payload, status_code=400)

    def library_store() -> LibraryStore:
        if state.library is None:
            raise ApiError(404, "no-library", "no library configured for this server")
        return state.library

    @app.get("/model")
    def get_model():
        return graph_to_dict(state.graph)

    @app.get("/model.galign")
    def get_model_text():
        return PlainTextResponse(serialize_model(state.graph))

    @app.put("/model")
    async def put_model(request: Request):
        body = await request.body()
        content_type = request.headers.get("content-type", "")
        try:
            if "json" in content_type:
                data = json.loads(body.decode("utf-8"))
                graph = graph_from_dict(data)
            else:
                graph = parse_model(body.decode("utf-8"))
        except ParseFailure as exc:
            return JSONResponse(
                {
                    "error": {
                        "code": "invalid-model",
                        "message": "model text rejected",
                        "subject": "",
                    },
                    "parse_errors": [
                        {
                            "line": e.span.line,
                            "column": e.span.column,
                            "length": e.span.length,
                            "message": e.message,
                            "snippet": e.snippet,
                        }
                        for e in exc.errors
                    ],
                },
                status_code=422,
            )
        except ModelError as exc:
            return JSONResponse(
                {
                    "error": {
                        "code": "invalid-model",
                        "message": "model violates invariants",
                        "subject": "",
                    },
                    "diagnostics": [diagnostic_dict(d) for d in exc.diagnostics],
                },
                status_code=422,
            )
        except (json.JSONDecodeError, UnicodeDecodeError, KeyError, ValueError, InvalidOperation) as exc:
            raise ApiError(400, "malformed-body", f"cannot read model: {exc}")
        state.swap(graph)
        warnings = [d for d in validate(graph) if d.severity is Severity.WARNING]
        return {"ok": True, "diagnostics": [diagnostic_dict(d) for d in warnings]}

    @app.post("/evaluate")
    def post_evaluate(options: EvalOptionsBody | None = None):
        graph = state.graph
        try:
            result = evaluate(graph, (options or EvalOptionsBody()).to_options())
        except ModelError as exc:
            raise ApiError(422, "invalid-model", str(exc))
        except ValueError as exc:
            raise ApiError(422, "bad-options", str(exc))
        return Response(export_json_report(graph, result), media_type="application/json")

    @app.get("/attribution")
    def get_attribution(
        from_id: str = Query(alias="from"), to_id: str = Query(alias="to")
    ):
        graph = state.graph
        try:
            result = attribute(graph, from_id, to_id)
        except ValueError as exc:
            raise ApiError(404, "unknown-id", str(exc))
        except ModelError as exc:
            raise ApiError(422, "invalid-model", str(exc))
        return attribution_dict(graph, result)

    @app.get("/prioritize")
    def get_prioritize(objectives: str | None = None):
        graph = state.graph
        targets = None
        if objectives:
            targets = [t for t in objectives.split(",") if t]
        try:
            rows = prioritize(graph, targets)
        except ValueError as exc:
            raise ApiError(404, "unknown-id", str(exc))
        except ModelError as exc:
            raise ApiError(422, "invalid-model", str(exc))
        resolved = targets or [o.id for o in graph.objectives if o.top_level]
        return priorities_dict(graph, resolved, rows)

    @app.post("/whatif")
    def post_whatif(body: ScenarioBody):
        graph = state.graph
        options = (body.options or EvalOptionsBody()).to_options()
        try:
            report = run_whatif(graph, body.to_scenario(), options)
        except ModelError as exc:
            raise ApiError(422, "invalid-scenario", str(exc))
        except ValueError as exc:
            raise ApiError(404, "unknown-id", str(exc))
        return diff_dict(report)

    @app.get("/prompts")
    def get_prompts():
        return prompts_dict(generate_prompts(state.graph))

    @app.get("/export/dot")
    def get_dot(with_eval: bool = False):
        graph = state.graph
        evaluation = None
        if with_eval:
            try:
                evaluation = evaluate(graph)
            except ModelError as exc:
                raise ApiError(422, "invalid-model", str(exc))
        return PlainTextResponse(export_dot(graph, evaluation))

    @app.get("/library")
    def get_library(q: str = ""):
        return library_dict(library_store().query(q))

    @app.post("/library")
    def post_library(entry: LibraryEntryBody):
        store = library_store()
        try:
            record = entry_from_json(entry.model_dump())
            store.add(record)
        except LibraryError as exc:
            raise ApiError(422, "library-error", str(exc), subject=entry.id)
        except (InvalidOperation, ValueError) as exc:
            raise ApiError(400, "malformed-body", str(exc))
        return {"ok": True, "id": entry.id}

    if ui_dir is not None and ui_dir.is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
