/** JSON payload shapes of the goal-graph service. */

export interface Quantity {
  value: number;
  unit: string;
}

export type StatusValue = "satisfied" | "in_doubt" | "unsatisfied" | "undetermined";

export interface AuthorJson {
  id: string;
  name: string;
  role: string;
  calibration: number;
}

export interface SoftGoalJson {
  id: string;
  kind: "goal" | "vision" | "mission";
  statement: string;
}

export interface ObjectiveJson {
  id: string;
  activity: string;
  object: string;
  focus: string;
  magnitude: Quantity;
  scale: string;
  timeframe: string;
  scope: string;
  author: string | null;
  top_level: boolean;
  label: string;
}

export interface RequirementJson {
  id: string;
  kind: "F" | "NF";
  headline: string;
  description: string;
  rationale: string;
  fit_criterion: string;
  effort_hours: number | null;
  included: boolean;
  label: string;
}

export interface ContributionJson {
  id: string;
  source: string;
  target: string;
  amount: Quantity;
  activity: string;
  confidence: number;
  combinator: "independent" | "and" | "or";
  or_group: string | null;
  author: string | null;
}

export interface DecompositionJson {
  id: string;
  parent: string;
  child: string;
}

export interface TraceJson {
  id: string;
  source: string;
  target: string;
}

export interface ModelJson {
  name: string;
  authors: AuthorJson[];
  softgoals: SoftGoalJson[];
  objectives: ObjectiveJson[];
  requirements: RequirementJson[];
  contributions: ContributionJson[];
  decompositions: DecompositionJson[];
  traces: TraceJson[];
}

export interface DiagnosticJson {
  severity: "error" | "warning";
  code: string;
  message: string;
  subject: string;
}

export interface ObjectiveReportJson {
  id: string;
  label: string;
  magnitude: Quantity;
  raw_sum: number;
  adjusted_sum: number;
  raw_fraction: number;
  adjusted_fraction: number;
  status: StatusValue;
}

export interface ReportJson {
  model: string;
  objectives: ObjectiveReportJson[];
  requirements: { id: string; label: string; included: boolean; effort_hours: number | null }[];
  diagnostics: DiagnosticJson[];
}

export interface OutcomeJson {
  raw_sum: number;
  adjusted_sum: number;
  raw_fraction: number;
  adjusted_fraction: number;
  status: StatusValue;
}

export interface DiffObjectiveJson {
  id: string;
  baseline: OutcomeJson;
  scenario: OutcomeJson;
  status_changed: boolean;
  delta_raw: number;
  delta_adjusted: number;
}

export interface DiffJson {
  objectives: DiffObjectiveJson[];
  transitions: Record<string, number>;
  changed_count: number;
}

export interface PromptJson {
  subject: string;
  kind: "why_needed" | "which_metric" | "gap_remaining" | "missing_field";
  question: string;
  gap: Quantity | null;
}

export interface AttributionPathJson {
  links: string[];
  delivered_amount: number;
  compound_confidence: number;
}

export interface AttributionJson {
  requirement: string;
  objective: string;
  unit: string;
  raw_amount: number;
  adjusted_amount: number;
  compound_confidence: number;
  paths: AttributionPathJson[];
  warnings: DiagnosticJson[];
}

export function quantityText(quantity: Quantity): string {
  const value = Number.isInteger(quantity.value)
    ? String(quantity.value)
    : String(Number(quantity.value.toFixed(6)));
  return quantity.unit === "%" ? `${value}%` : `${value} ${quantity.unit}`;
}
