"""Abstraction prompts and the persistent estimate library.

Prompts nudge the analyst toward a fully linked, fully quantified model:
an unlinked requirement gets asked why it exists, a dead-end objective
gets asked what it serves, an under-contributed objective gets the exact
remaining gap, and thin records get asked for the recommended fields.

The library keeps past contribution estimates (and, once known, actual
outcomes) in a JSON-lines file so future models can reuse numbers and
calibrate how much to trust each estimator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal
from enum import Enum
from fractions import Fraction
from pathlib import Path

from .model import GoalGraph, Quantity, format_number, render_label

#: Question templates, fixed for golden testing.
WHY_NEEDED_TEMPLATE = "Why is '{headline}' needed? Which business objective's scale does it move?"
WHICH_METRIC_TEMPLATE = (
    "What higher objective does satisfying '{label}' serve, and by how much on whose scale?"
)
GAP_REMAINING_TEMPLATE = "A gap of {gap} remains toward '{label}' - what else contributes?"
MISSING_FIELD_TEMPLATE = "'{name}' is missing recommended field(s): {fields}."


class PromptKind(str, Enum):
    WHY_NEEDED = "why_needed"
    WHICH_METRIC = "which_metric"
    GAP_REMAINING = "gap_remaining"
    MISSING_FIELD = "missing_field"


_KIND_ORDER = {kind: index for index, kind in enumerate(PromptKind)}


@dataclass(frozen=True)
class Prompt:
    subject: str
    kind: PromptKind
    question: str
    gap: Quantity | None = None


def generate_prompts(graph: GoalGraph) -> list[Prompt]:
    """Emit prompts for under-linked or under-specified elements.

    Deterministic: ordered by subject id, then prompt kind. Every node
    failing a rule yields exactly one prompt of that kind.
    """
    prompts: list[Prompt] = []
    outgoing = {l.source for l in graph.contributions}
    decomposition_parents = {l.parent for l in graph.decompositions}

    for req in graph.requirements:
        # a requirement that is refined by children is justified by them;
        # anything else must move some objective's scale itself
        if req.id not in outgoing and req.id not in decomposition_parents:
            prompts.append(
                Prompt(
                    subject=req.id,
                    kind=PromptKind.WHY_NEEDED,
                    question=WHY_NEEDED_TEMPLATE.format(headline=req.headline),
                )
            )
        missing = [
            name
            for name, value in (
                ("rationale", req.rationale),
                ("effort_hours", req.effort_hours),
            )
            if value is None or (isinstance(value, str) and not value.strip())
        ]
        if missing:
            prompts.append(
                Prompt(
                    subject=req.id,
                    kind=PromptKind.MISSING_FIELD,
                    question=MISSING_FIELD_TEMPLATE.format(
                        name=req.headline, fields=", ".join(missing)
                    ),
                )
            )

    incoming_total: dict[str, Decimal] = {}
    for link in graph.contributions:
        incoming_total[link.target] = (
            incoming_total.get(link.target, Decimal(0)) + link.amount.value
        )
    for obj in graph.objectives:
        label = render_label(obj)
        if not obj.top_level and obj.id not in outgoing:
            prompts.append(
                Prompt(
                    subject=obj.id,
                    kind=PromptKind.WHICH_METRIC,
                    question=WHICH_METRIC_TEMPLATE.format(label=label),
                )
            )
        total = incoming_total.get(obj.id, Decimal(0))
        if total < obj.magnitude.value:
            gap = Quantity(obj.magnitude.value - total, obj.magnitude.unit)
            prompts.append(
                Prompt(
                    subject=obj.id,
                    kind=PromptKind.GAP_REMAINING,
                    question=GAP_REMAINING_TEMPLATE.format(gap=gap, label=label),
                    gap=gap,
                )
            )
        if not obj.timeframe.strip():
            prompts.append(
                Prompt(
                    subject=obj.id,
                    kind=PromptKind.MISSING_FIELD,
                    question=MISSING_FIELD_TEMPLATE.format(name=label, fields="timeframe"),
                )
            )

    prompts.sort(key=lambda p: (p.subject, _KIND_ORDER[p.kind]))
    return prompts


# --- estimate library ----------------------------------------------------------


@dataclass(frozen=True)
class LibraryEntry:
    """One past estimate: what was promised, with what confidence, by whom,
    and (once measured) what actually happened."""

    id: str
    project: str
    activity: str
    focus: str
    scale: str
    estimated: Quantity
    confidence: Decimal
    author: str
    recorded_at: str
    actual: Quantity | None = None


class LibraryError(Exception):
    pass


def _quantity_to_json(quantity: Quantity) -> dict:
    return {"value": format_number(quantity.value), "unit": quantity.unit}


def _quantity_from_json(data: dict) -> Quantity:
    return Quantity(Decimal(str(data["value"])), data["unit"])


def entry_to_json(entry: LibraryEntry) -> dict:
    return {
        "id": entry.id,
        "project": entry.project,
        "activity": entry.activity,
        "focus": entry.focus,
        "scale": entry.scale,
        "estimated": _quantity_to_json(entry.estimated),
        "confidence": format_number(entry.confidence),
        "author": entry.author,
        "recorded_at": entry.recorded_at,
        "actual": _quantity_to_json(entry.actual) if entry.actual else None,
    }


def entry_from_json(data: dict) -> LibraryEntry:
    return LibraryEntry(
        id=data["id"],
        project=data.get("project", ""),
        activity=data.get("activity", ""),
        focus=data.get("focus", ""),
        scale=data.get("scale", ""),
        estimated=_quantity_from_json(data["estimated"]),
        confidence=Decimal(str(data["confidence"])),
        author=data.get("author", ""),
        recorded_at=data.get("recorded_at", ""),
        actual=_quantity_from_json(data["actual"]) if data.get("actual") else None,
    )


class LibraryStore:
    """JSON-lines backed store of LibraryEntry records.

    Single-writer: appends go straight to disk, so entries survive process
    restarts. Reads load the whole file (desk-scale data).
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def entries(self) -> list[LibraryEntry]:
        if not self.path.exists():
            return []
        out = []
        with self.path.open(encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    out.append(entry_from_json(json.loads(line)))
        return out

    def add(self, entry: LibraryEntry) -> LibraryEntry:
        if entry.actual is not None and not entry.estimated.compatible_with(entry.actual):
            raise LibraryError(
                f"entry {entry.id!r}: estimated unit {entry.estimated.unit!r} "
                f"does not match actual unit {entry.actual.unit!r}"
            )
        if any(existing.id == entry.id for existing in self.entries()):
            raise LibraryError(f"duplicate library entry id {entry.id!r}")
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(entry_to_json(entry), ensure_ascii=False) + "\n")
        return entry

    def query(self, text: str = "") -> list[LibraryEntry]:
        """Entries whose focus or scale contains the text, newest first."""
        needle = text.casefold()
        hits = [
            entry
            for entry in self.entries()
            if needle in entry.focus.casefold() or needle in entry.scale.casefold()
        ]
        hits.sort(key=lambda e: (e.recorded_at, e.id), reverse=True)
        return hits

    def suggest_calibration(self, author: str) -> Decimal | None:
        """Mean achievement ratio of the author's outcome-bearing entries.

        Each entry contributes min(1, actual/estimated); the mean is
        floored at 0.01 so the suggestion stays a usable (0,1] multiplier.
        Entries with a zero estimate are skipped. None when the author has
        no entries with an actual outcome.
        """
        ratios: list[Fraction] = []
        for entry in self.entries():
            if entry.author != author or entry.actual is None:
                continue
            if entry.estimated.value == 0:
                continue
            ratio = Fraction(entry.actual.value) / Fraction(entry.estimated.value)
            ratios.append(min(Fraction(1), ratio))
        if not ratios:
            return None
        mean = sum(ratios, Fraction(0)) / len(ratios)
        mean = min(Fraction(1), max(Fraction(1, 100), mean))
        return Decimal(mean.numerator) / Decimal(mean.denominator)
