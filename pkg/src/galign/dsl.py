"""The `.galign` textual model format: parsing and canonical serialization.

A model file is a sequence of blocks:

    model "Project"

    objective O4 {
      activity: "Reduced"
      focus: "Geometry Creation Time"
      magnitude: 80%
      scale: "percentage cut in geometry creation time"
    }

    requirement R1 {
      kind: F
      headline: "Generate component geometry"
      fit_criterion: "geometry produced without manual CAD work"
    }

    contribution C from R1 to O4 {
      amount: 80%
      confidence: 1
    }

`#` starts a line comment. TEXT values are double-quoted with `\\"` and
`\\\\` escapes; numbers are plain decimals without exponents. Parsing
recovers at block boundaries so a broken file reports every error, not
just the first. Serialization is canonical (fixed item and field order,
defaults omitted), so equal graphs produce identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from typing import Callable

from .model import (
    Author,
    Combinator,
    ContributionLink,
    DecompositionLink,
    GoalGraph,
    Link,
    ModelError,
    Node,
    Objective,
    Quantity,
    Requirement,
    RequirementKind,
    SoftGoal,
    SoftGoalKind,
    TraceLink,
    build_graph,
    format_number,
)

ITEM_KEYWORDS = frozenset(
    {"objective", "requirement", "softgoal", "author", "contribution", "decomposition", "trace"}
)


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    message: str
    snippet: str

    def __str__(self) -> str:
        return f"{self.span.line}:{self.span.column}: {self.message}"


class ParseFailure(Exception):
    """Raised when a model text cannot be turned into a valid graph.

    Carries every error found, both syntactic and (when the text parses
    but the graph breaks an invariant) semantic.
    """

    def __init__(self, errors: list[ParseError]):
        self.errors = errors
        super().__init__("; ".join(str(e) for e in errors))


@dataclass
class ParsedDocument:
    """Raw parse result before invariant checking.

    `spans` maps node/author/link ids to their definition site so semantic
    diagnostics can point back into the source.
    """

    name: str = ""
    nodes: list[Node] = field(default_factory=list)
    authors: list[Author] = field(default_factory=list)
    links: list[Link] = field(default_factory=list)
    spans: dict[str, SourceSpan] = field(default_factory=dict)
    errors: list[ParseError] = field(default_factory=list)


def decomposition_id(parent: str, child: str) -> str:
    """Decomposition items carry no id in the DSL; derive a stable one."""
    return f"dec_{parent}_{child}"


def trace_id(source: str, target: str) -> str:
    return f"trace_{source}_{target}"


# --- lexer -------------------------------------------------------------------

_PUNCT = "{}:()%"


@dataclass(frozen=True)
class _Token:
    kind: str  # ident | number | string | punct | eof
    text: str
    line: int
    column: int
    value: object = None

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.column, max(1, len(self.text)))


def _lex(text: str) -> tuple[list[_Token], list[ParseError], list[str]]:
    lines = text.split("\n")
    tokens: list[_Token] = []
    errors: list[ParseError] = []

    def snippet(line: int) -> str:
        return lines[line - 1].strip() if 1 <= line <= len(lines) else ""

    i = 0
    line = 1
    col = 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
                col += 1
            continue
        if ch in _PUNCT:
            tokens.append(_Token("punct", ch, line, col))
            i += 1
            col += 1
            continue
        if ch == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            out: list[str] = []
            closed = False
            while i < n:
                c = text[i]
                if c == "\n":
                    break
                if c == "\\":
                    if i + 1 < n and text[i + 1] in '"\\':
                        out.append(text[i + 1])
                        i += 2
                        col += 2
                        continue
                    errors.append(
                        ParseError(
                            SourceSpan(line, col, 2),
                            "invalid escape sequence (only \\\" and \\\\ are allowed)",
                            snippet(line),
                        )
                    )
                    i += 2
                    col += 2
                    continue
                if c == '"':
                    i += 1
                    col += 1
                    closed = True
                    break
                out.append(c)
                i += 1
                col += 1
            if not closed:
                errors.append(
                    ParseError(
                        SourceSpan(start_line, start_col, col - start_col),
                        "unterminated string",
                        snippet(start_line),
                    )
                )
            value = "".join(out)
            tokens.append(
                _Token("string", text_repr(value), start_line, start_col, value)
            )
            continue
        if ch.isdigit():
            start_col = col
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            lexeme = text[i:j]
            tokens.append(_Token("number", lexeme, line, start_col, Decimal(lexeme)))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            start_col = col
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_-"):
                j += 1
            lexeme = text[i:j]
            tokens.append(_Token("ident", lexeme, line, start_col, lexeme))
            col += j - i
            i = j
            continue
        errors.append(
            ParseError(SourceSpan(line, col, 1), f"unexpected character {ch!r}", snippet(line))
        )
        i += 1
        col += 1
    tokens.append(_Token("eof", "", line, col))
    return tokens, errors, lines


def text_repr(value: str) -> str:
    escaped = value.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


# --- parser ------------------------------------------------------------------


class _FieldError(Exception):
    """Internal signal: abort the current block and resynchronize."""


class _Parser:
    def __init__(self, text: str):
        self.tokens, lex_errors, self.lines = _lex(text)
        self.pos = 0
        self.doc = ParsedDocument()
        self.doc.errors.extend(lex_errors)

    # token primitives

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        token = self.current
        if token.kind != "eof":
            self.pos += 1
        return token

    def snippet(self, token: _Token) -> str:
        if 1 <= token.line <= len(self.lines):
            return self.lines[token.line - 1].strip()
        return ""

    def error(self, message: str, token: _Token | None = None) -> None:
        token = token or self.current
        self.doc.errors.append(ParseError(token.span, message, self.snippet(token)))

    def fail(self, message: str, token: _Token | None = None) -> _FieldError:
        self.error(message, token)
        return _FieldError()

    def expect_ident(self, what: str) -> _Token:
        if self.current.kind != "ident":
            raise self.fail(f"expected {what}")
        return self.advance()

    def expect_keyword(self, word: str) -> _Token:
        if self.current.kind != "ident" or self.current.text != word:
            raise self.fail(f"expected '{word}'")
        return self.advance()

    def expect_punct(self, ch: str) -> _Token:
        if self.current.kind != "punct" or self.current.text != ch:
            raise self.fail(f"expected '{ch}'")
        return self.advance()

    def sync_to_item(self) -> None:
        """Skip ahead to the next plausible item start (recovery point)."""
        depth = 0
        while self.current.kind != "eof":
            token = self.current
            if token.kind == "punct" and token.text == "{":
                depth += 1
            elif token.kind == "punct" and token.text == "}":
                if depth > 0:
                    depth -= 1
                    self.advance()
                    if depth == 0:
                        return
                    continue
                else:
                    self.advance()
                    return
            elif depth == 0 and token.kind == "ident" and token.text in ITEM_KEYWORDS:
                return
            self.advance()

    # value parsers

    def parse_text(self) -> str:
        if self.current.kind != "string":
            raise self.fail("expected a quoted string")
        return self.advance().value  # type: ignore[return-value]

    def parse_number(self) -> Decimal:
        if self.current.kind != "number":
            raise self.fail("expected a number")
        return self.advance().value  # type: ignore[return-value]

    def parse_bool(self) -> bool:
        token = self.current
        if token.kind == "ident" and token.text in ("true", "false"):
            self.advance()
            return token.text == "true"
        raise self.fail("expected 'true' or 'false'")

    def parse_quantity(self) -> Quantity:
        if self.current.kind != "number":
            raise self.fail("malformed quantity: expected a number")
        value = self.advance().value
        token = self.current
        if token.kind == "punct" and token.text == "%":
            self.advance()
            return Quantity(value)  # type: ignore[arg-type]
        if token.kind == "ident":
            self.advance()
            return Quantity(value, token.text)  # type: ignore[arg-type]
        raise self.fail("malformed quantity: expected '%' or a unit name")

    def parse_combinator(self) -> tuple[Combinator, str | None]:
        token = self.expect_ident("a combinator ('and', 'or(<group>)' or 'independent')")
        if token.text == "and":
            return Combinator.AND, None
        if token.text == "independent":
            return Combinator.INDEPENDENT, None
        if token.text == "or":
            self.expect_punct("(")
            group = self.expect_ident("an or-group identifier")
            self.expect_punct(")")
            return Combinator.OR, group.text
        raise self.fail(f"unknown combinator {token.text!r}", token)

    # block machinery

    def parse_fields(
        self,
        item: str,
        header: _Token,
        parsers: dict[str, Callable[[], object]],
        required: tuple[str, ...],
    ) -> dict[str, object]:
        self.expect_punct("{")
        values: dict[str, object] = {}
        while True:
            token = self.current
            if token.kind == "punct" and token.text == "}":
                self.advance()
                break
            if token.kind == "eof":
                raise self.fail(f"unterminated {item} block (missing '}}')", header)
            if token.kind != "ident":
                raise self.fail(f"expected a field name or '}}' in {item} block")
            if token.text not in parsers:
                raise self.fail(f"unknown field {token.text!r} in {item} block", token)
            self.advance()
            self.expect_punct(":")
            if token.text in values:
                self.error(f"duplicate field {token.text!r}", token)
                parsers[token.text]()  # consume the value anyway
                continue
            values[token.text] = parsers[token.text]()
        missing = [name for name in required if name not in values]
        if missing:
            raise self.fail(
                f"{item} is missing required field(s): {', '.join(missing)}", header
            )
        return values

    # items

    def parse_document(self) -> ParsedDocument:
        try:
            self.expect_keyword("model")
            name = self.parse_text()
            self.doc.name = name
        except _FieldError:
            return self.doc  # nothing sensible before the model header
        while self.current.kind != "eof":
            token = self.current
            if token.kind != "ident" or token.text not in ITEM_KEYWORDS:
                self.error(
                    f"unknown keyword {token.text!r}: expected one of "
                    + ", ".join(sorted(ITEM_KEYWORDS)),
                )
                self.advance()
                self.sync_to_item()
                continue
            try:
                getattr(self, f"parse_{token.text}")()
            except _FieldError:
                self.sync_to_item()
        return self.doc

    def register(self, ident: _Token) -> None:
        # First definition wins the span; duplicates are caught at build time.
        self.doc.spans.setdefault(ident.text, ident.span)

    def parse_objective(self) -> None:
        self.expect_keyword("objective")
        ident = self.expect_ident("an objective id")
        values = self.parse_fields(
            "objective",
            ident,
            {
                "activity": self.parse_text,
                "object": self.parse_text,
                "focus": self.parse_text,
                "scale": self.parse_text,
                "timeframe": self.parse_text,
                "scope": self.parse_text,
                "author": self.parse_text,
                "magnitude": self.parse_quantity,
                "top_level": self.parse_bool,
            },
            required=("activity", "focus", "magnitude", "scale"),
        )
        self.register(ident)
        self.doc.nodes.append(
            Objective(
                id=ident.text,
                activity=values["activity"],
                object=values.get("object", ""),
                focus=values["focus"],
                magnitude=values["magnitude"],
                scale=values["scale"],
                timeframe=values.get("timeframe", ""),
                scope=values.get("scope", ""),
                author=values.get("author"),
                top_level=values.get("top_level", False),
            )
        )

    def parse_requirement(self) -> None:
        self.expect_keyword("requirement")
        ident = self.expect_ident("a requirement id")

        def parse_kind() -> RequirementKind:
            token = self.expect_ident("'F' or 'NF'")
            if token.text == "F":
                return RequirementKind.FUNCTIONAL
            if token.text == "NF":
                return RequirementKind.NON_FUNCTIONAL
            raise self.fail("requirement kind must be 'F' or 'NF'", token)

        values = self.parse_fields(
            "requirement",
            ident,
            {
                "kind": parse_kind,
                "headline": self.parse_text,
                "description": self.parse_text,
                "rationale": self.parse_text,
                "fit_criterion": self.parse_text,
                "effort_hours": self.parse_number,
                "included": self.parse_bool,
            },
            required=("kind", "headline", "fit_criterion"),
        )
        self.register(ident)
        self.doc.nodes.append(
            Requirement(
                id=ident.text,
                kind=values["kind"],
                headline=values["headline"],
                description=values.get("description", ""),
                rationale=values.get("rationale", ""),
                fit_criterion=values["fit_criterion"],
                effort_hours=values.get("effort_hours"),
                included=values.get("included", True),
            )
        )

    def parse_softgoal(self) -> None:
        self.expect_keyword("softgoal")
        ident = self.expect_ident("a softgoal id")

        def parse_kind() -> SoftGoalKind:
            token = self.expect_ident("'goal', 'vision' or 'mission'")
            try:
                return SoftGoalKind(token.text)
            except ValueError:
                raise self.fail("softgoal kind must be 'goal', 'vision' or 'mission'", token)

        values = self.parse_fields(
            "softgoal",
            ident,
            {"kind": parse_kind, "statement": self.parse_text},
            required=("kind", "statement"),
        )
        self.register(ident)
        self.doc.nodes.append(
            SoftGoal(id=ident.text, kind=values["kind"], statement=values["statement"])
        )

    def parse_author(self) -> None:
        self.expect_keyword("author")
        ident = self.expect_ident("an author id")
        values = self.parse_fields(
            "author",
            ident,
            {
                "name": self.parse_text,
                "role": self.parse_text,
                "calibration": self.parse_number,
            },
            required=("name",),
        )
        self.register(ident)
        self.doc.authors.append(
            Author(
                id=ident.text,
                name=values["name"],
                role=values.get("role", ""),
                calibration=values.get("calibration", Decimal(1)),
            )
        )

    def parse_contribution(self) -> None:
        self.expect_keyword("contribution")
        ident = self.expect_ident("a contribution id")
        self.expect_keyword("from")
        source = self.expect_ident("a source node id")
        self.expect_keyword("to")
        target = self.expect_ident("a target node id")
        values = self.parse_fields(
            "contribution",
            ident,
            {
                "amount": self.parse_quantity,
                "activity": self.parse_text,
                "confidence": self.parse_number,
                "combinator": self.parse_combinator,
                "author": lambda: self.expect_ident("an author id").text,
            },
            required=("amount", "confidence"),
        )
        combinator, or_group = values.get("combinator", (Combinator.INDEPENDENT, None))
        self.register(ident)
        self.doc.links.append(
            ContributionLink(
                id=ident.text,
                source=source.text,
                target=target.text,
                amount=values["amount"],
                activity=values.get("activity", ""),
                confidence=values["confidence"],
                combinator=combinator,
                or_group=or_group,
                author=values.get("author"),
            )
        )

    def parse_decomposition(self) -> None:
        keyword = self.expect_keyword("decomposition")
        self.expect_keyword("from")
        parent = self.expect_ident("a parent requirement id")
        self.expect_keyword("to")
        child = self.expect_ident("a child requirement id")
        link_id = decomposition_id(parent.text, child.text)
        self.doc.spans.setdefault(link_id, keyword.span)
        self.doc.links.append(DecompositionLink(id=link_id, parent=parent.text, child=child.text))

    def parse_trace(self) -> None:
        keyword = self.expect_keyword("trace")
        self.expect_keyword("from")
        source = self.expect_ident("an objective id")
        self.expect_keyword("to")
        target = self.expect_ident("a softgoal id")
        link_id = trace_id(source.text, target.text)
        self.doc.spans.setdefault(link_id, keyword.span)
        self.doc.links.append(TraceLink(id=link_id, source=source.text, target=target.text))


def parse_document(text: str) -> ParsedDocument:
    """Parse without invariant checks; collects all syntactic errors."""
    return _Parser(text).parse_document()


def parse_model(text: str) -> GoalGraph:
    """Parse text into a checked graph.

    Raises ParseFailure carrying every error found: all syntax errors, or,
    if the text is grammatical, all invariant violations mapped back to
    the offending definitions.
    """
    doc = parse_document(text)
    if doc.errors:
        raise ParseFailure(doc.errors)
    try:
        return build_graph(doc.nodes, doc.authors, doc.links, name=doc.name)
    except ModelError as exc:
        top = SourceSpan(1, 1, 5)
        errors = [
            ParseError(
                doc.spans.get(d.subject, top),
                f"{d.code}: {d.message}",
                d.subject,
            )
            for d in exc.diagnostics
        ]
        raise ParseFailure(errors) from exc


# --- serializer --------------------------------------------------------------


def _quantity_text(quantity: Quantity) -> str:
    if quantity.is_percent:
        return f"{format_number(quantity.value)}%"
    return f"{format_number(quantity.value)} {quantity.unit}"


def _check_text(owner: str, name: str, value: str) -> str:
    if any(ord(c) < 32 and c != "\t" for c in value):
        raise ValueError(f"{owner}.{name} contains control characters, not representable")
    return text_repr(value)


def serialize_model(graph: GoalGraph) -> str:
    """Emit canonical `.galign` text.

    Items are grouped (authors, softgoals, objectives, requirements,
    contributions, decompositions, traces), sorted by id inside each
    group, with fields in grammar order and defaults omitted. The same
    graph always serializes to identical bytes, and parsing the output
    reproduces the graph.
    """
    out: list[str] = [f"model {_check_text('model', 'name', graph.name)}"]

    def block(header: str, fields: list[str]) -> None:
        out.append("")
        out.append(header + " {")
        out.extend(f"  {line}" for line in fields)
        out.append("}")

    for author in sorted(graph.authors, key=lambda a: a.id):
        fields = [f"name: {_check_text(author.id, 'name', author.name)}"]
        if author.role:
            fields.append(f"role: {_check_text(author.id, 'role', author.role)}")
        if author.calibration != 1:
            fields.append(f"calibration: {format_number(author.calibration)}")
        block(f"author {author.id}", fields)

    for goal in sorted(graph.softgoals, key=lambda g: g.id):
        block(
            f"softgoal {goal.id}",
            [
                f"kind: {goal.kind.value}",
                f"statement: {_check_text(goal.id, 'statement', goal.statement)}",
            ],
        )

    for obj in sorted(graph.objectives, key=lambda o: o.id):
        fields = [f"activity: {_check_text(obj.id, 'activity', obj.activity)}"]
        if obj.object:
            fields.append(f"object: {_check_text(obj.id, 'object', obj.object)}")
        fields.append(f"focus: {_check_text(obj.id, 'focus', obj.focus)}")
        fields.append(f"scale: {_check_text(obj.id, 'scale', obj.scale)}")
        if obj.timeframe:
            fields.append(f"timeframe: {_check_text(obj.id, 'timeframe', obj.timeframe)}")
        if obj.scope:
            fields.append(f"scope: {_check_text(obj.id, 'scope', obj.scope)}")
        if obj.author is not None:
            fields.append(f"author: {_check_text(obj.id, 'author', obj.author)}")
        fields.append(f"magnitude: {_quantity_text(obj.magnitude)}")
        if obj.top_level:
            fields.append("top_level: true")
        block(f"objective {obj.id}", fields)

    for req in sorted(graph.requirements, key=lambda r: r.id):
        fields = [f"kind: {req.kind.value}"]
        fields.append(f"headline: {_check_text(req.id, 'headline', req.headline)}")
        if req.description:
            fields.append(f"description: {_check_text(req.id, 'description', req.description)}")
        if req.rationale:
            fields.append(f"rationale: {_check_text(req.id, 'rationale', req.rationale)}")
        fields.append(f"fit_criterion: {_check_text(req.id, 'fit_criterion', req.fit_criterion)}")
        if req.effort_hours is not None:
            fields.append(f"effort_hours: {format_number(req.effort_hours)}")
        if not req.included:
            fields.append("included: false")
        block(f"requirement {req.id}", fields)

    for link in sorted(graph.contributions, key=lambda l: l.id):
        fields = [f"amount: {_quantity_text(link.amount)}"]
        if link.activity:
            fields.append(f"activity: {_check_text(link.id, 'activity', link.activity)}")
        fields.append(f"confidence: {format_number(link.confidence)}")
        if link.combinator is Combinator.AND:
            fields.append("combinator: and")
        elif link.combinator is Combinator.OR:
            fields.append(f"combinator: or({link.or_group})")
        if link.author is not None:
            fields.append(f"author: {link.author}")
        block(f"contribution {link.id} from {link.source} to {link.target}", fields)

    for link in sorted(graph.decompositions, key=lambda l: l.id):
        out.append("")
        out.append(f"decomposition from {link.parent} to {link.child}")

    for link in sorted(graph.traces, key=lambda l: l.id):
        out.append("")
        out.append(f"trace from {link.source} to {link.target}")

    return "\n".join(out) + "\n"
