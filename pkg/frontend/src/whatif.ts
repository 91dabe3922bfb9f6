/** What-if override state: non-destructive until committed.
 *
 * Overrides accumulate locally, every change is sent to POST /whatif for
 * evaluation against the baseline, and "commit" folds them into a new
 * model for PUT /model. One control per entity, so overrides can never
 * conflict.
 */

import type { ScenarioBody, ScenarioOverride } from "./api.js";
import type { ModelJson, Quantity } from "./types.js";

export class OverrideSet {
  readonly confidences = new Map<string, number>();
  readonly amounts = new Map<string, Quantity>();
  readonly exclusions = new Map<string, boolean>();
  readonly orSelections = new Map<string, string>();

  get size(): number {
    return (
      this.confidences.size + this.amounts.size + this.exclusions.size + this.orSelections.size
    );
  }

  setConfidence(link: string, value: number): void {
    this.confidences.set(link, value);
  }

  setAmount(link: string, amount: Quantity): void {
    this.amounts.set(link, amount);
  }

  setIncluded(requirement: string, included: boolean): void {
    this.exclusions.set(requirement, included);
  }

  selectOr(group: string, link: string): void {
    this.orSelections.set(group, link);
  }

  reset(): void {
    this.confidences.clear();
    this.amounts.clear();
    this.exclusions.clear();
    this.orSelections.clear();
  }

  toScenario(name = "ui scenario"): ScenarioBody {
    const overrides: ScenarioOverride[] = [];
    for (const [link, value] of [...this.confidences].sort()) {
      overrides.push({ set_confidence: { link, value } });
    }
    for (const [link, amount] of [...this.amounts].sort()) {
      overrides.push({ set_amount: { link, value: amount.value, unit: amount.unit } });
    }
    for (const [id, included] of [...this.exclusions].sort()) {
      overrides.push({ include_requirement: { id, included } });
    }
    for (const [group, link] of [...this.orSelections].sort()) {
      overrides.push({ select_or: { group, link } });
    }
    return { name, overrides };
  }

  /** New model JSON with the graph-level overrides applied (for commit).
   * OR selections stay evaluation options and do not touch the model. */
  applyTo(model: ModelJson): ModelJson {
    const next: ModelJson = JSON.parse(JSON.stringify(model)) as ModelJson;
    for (const link of next.contributions) {
      const confidence = this.confidences.get(link.id);
      if (confidence !== undefined) link.confidence = confidence;
      const amount = this.amounts.get(link.id);
      if (amount !== undefined) link.amount = { ...amount };
    }
    for (const requirement of next.requirements) {
      const included = this.exclusions.get(requirement.id);
      if (included !== undefined) requirement.included = included;
    }
    return next;
  }
}

/** Guards against out-of-order what-if responses: only the latest wins. */
export class LatestWins {
  private counter = 0;

  next(): number {
    this.counter += 1;
    return this.counter;
  }

  isCurrent(ticket: number): boolean {
    return ticket === this.counter;
  }
}
