/** Template forms for objectives and requirements, plus the confidence picker.
 *
 * The objective form keeps the template's eight fields in their canonical
 * order; the requirement form carries the Volere-flavoured fields. The
 * confidence picker offers the four canonical levels with their meaning as
 * help text and still accepts free values, flagging non-canonical ones.
 */

import type { ObjectiveJson, RequirementJson } from "./types.js";
import { quantityText } from "./types.js";

export const OBJECTIVE_FIELD_ORDER = [
  "Activity",
  "Object",
  "Focus",
  "Magnitude",
  "Scale",
  "Timeframe",
  "Scope",
  "Author",
] as const;

export const REQUIREMENT_FIELD_ORDER = [
  "Kind",
  "Headline",
  "Description",
  "Rationale",
  "Fit Criterion",
  "Effort Hours",
  "Included",
] as const;

export interface ConfidenceLevel {
  value: number;
  description: string;
}

export const CONFIDENCE_LEVELS: readonly ConfidenceLevel[] = [
  {
    value: 0.25,
    description:
      "Poor credibility, no supporting evidence or calculations, high doubt about capability",
  },
  {
    value: 0.5,
    description:
      "Average credibility, no evidence but reliable calculations, some doubt about capability",
  },
  {
    value: 0.75,
    description:
      "Great credibility, reliable secondary sources of evidence, small doubt about capability",
  },
  {
    value: 1,
    description:
      "Perfect credibility, multiple primary sources of evidence, no doubt about capability",
  },
] as const;

export const NON_CANONICAL_WARNING =
  "not a canonical confidence level (0.25, 0.5, 0.75 or 1)";

export function isCanonicalConfidence(value: number): boolean {
  return CONFIDENCE_LEVELS.some((level) => level.value === value);
}

export function confidenceOptionLabel(level: ConfidenceLevel): string {
  return `${level.value} - ${level.description}`;
}

const REQUIRED_OBJECTIVE_FIELDS = ["Activity", "Focus", "Magnitude", "Scale"] as const;
const REQUIRED_REQUIREMENT_FIELDS = ["Kind", "Headline", "Fit Criterion"] as const;

export function fieldName(label: string): string {
  return label.toLowerCase().replace(/ /g, "_");
}

function addField(
  doc: Document,
  form: HTMLFormElement,
  label: string,
  value: string,
  required: boolean,
): HTMLInputElement {
  const row = doc.createElement("label");
  row.className = "form-row";
  const caption = doc.createElement("span");
  caption.textContent = required ? `${label} *` : label;
  caption.className = "field-label";
  const input = doc.createElement("input");
  input.name = fieldName(label);
  input.value = value;
  if (required) input.dataset.required = "true";
  row.appendChild(caption);
  row.appendChild(input);
  form.appendChild(row);
  return input;
}

export function buildObjectiveForm(doc: Document, objective: ObjectiveJson | null): HTMLFormElement {
  const form = doc.createElement("form");
  form.className = "template-form objective-form";
  const values: Record<string, string> = {
    Activity: objective?.activity ?? "",
    Object: objective?.object ?? "",
    Focus: objective?.focus ?? "",
    Magnitude: objective ? quantityText(objective.magnitude) : "",
    Scale: objective?.scale ?? "",
    Timeframe: objective?.timeframe ?? "",
    Scope: objective?.scope ?? "",
    Author: objective?.author ?? "",
  };
  for (const label of OBJECTIVE_FIELD_ORDER) {
    addField(
      doc,
      form,
      label,
      values[label] ?? "",
      (REQUIRED_OBJECTIVE_FIELDS as readonly string[]).includes(label),
    );
  }
  return form;
}

export function buildRequirementForm(
  doc: Document,
  requirement: RequirementJson | null,
): HTMLFormElement {
  const form = doc.createElement("form");
  form.className = "template-form requirement-form";
  const values: Record<string, string> = {
    Kind: requirement?.kind ?? "F",
    Headline: requirement?.headline ?? "",
    Description: requirement?.description ?? "",
    Rationale: requirement?.rationale ?? "",
    "Fit Criterion": requirement?.fit_criterion ?? "",
    "Effort Hours": requirement?.effort_hours?.toString() ?? "",
    Included: requirement === null || requirement.included ? "true" : "false",
  };
  for (const label of REQUIREMENT_FIELD_ORDER) {
    addField(
      doc,
      form,
      label,
      values[label] ?? "",
      (REQUIRED_REQUIREMENT_FIELDS as readonly string[]).includes(label),
    );
  }
  return form;
}

/** Empty required fields, by label; the app refuses to PUT while non-empty. */
export function formErrors(form: HTMLFormElement): string[] {
  const errors: string[] = [];
  form.querySelectorAll("input[data-required]").forEach((node) => {
    const input = node as HTMLInputElement;
    if (!input.value.trim()) errors.push(input.name);
  });
  return errors;
}

export interface ConfidencePicker {
  root: HTMLElement;
  input: HTMLInputElement;
  warning: HTMLElement;
}

export function buildConfidencePicker(
  doc: Document,
  current: number,
  onChange: (value: number) => void,
): ConfidencePicker {
  const root = doc.createElement("div");
  root.className = "confidence-picker";

  const select = doc.createElement("select");
  select.className = "confidence-levels";
  const custom = doc.createElement("option");
  custom.value = "";
  custom.textContent = "custom…";
  select.appendChild(custom);
  for (const level of CONFIDENCE_LEVELS) {
    const option = doc.createElement("option");
    option.value = String(level.value);
    option.textContent = confidenceOptionLabel(level);
    option.title = level.description;
    select.appendChild(option);
  }

  const input = doc.createElement("input");
  input.type = "number";
  input.min = "0.01";
  input.max = "1";
  input.step = "0.05";
  input.value = String(current);
  input.className = "confidence-value";

  const warning = doc.createElement("span");
  warning.className = "confidence-warning";

  const apply = (value: number) => {
    warning.textContent = isCanonicalConfidence(value) ? "" : NON_CANONICAL_WARNING;
    onChange(value);
  };

  select.value = isCanonicalConfidence(current) ? String(current) : "";
  select.addEventListener("change", () => {
    if (select.value === "") return;
    const value = Number(select.value);
    input.value = select.value;
    apply(value);
  });
  input.addEventListener("input", () => {
    const value = Number(input.value);
    if (!Number.isFinite(value) || value <= 0 || value > 1) {
      warning.textContent = "confidence must be in (0, 1]";
      return;
    }
    select.value = isCanonicalConfidence(value) ? String(value) : "";
    apply(value);
  });

  root.appendChild(select);
  root.appendChild(input);
  root.appendChild(warning);
  return { root, input, warning };
}
