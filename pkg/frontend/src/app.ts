/** Application controller: model snapshot, live evaluation, what-if loop.
 *
 * The server owns all arithmetic. This controller fetches the snapshot
 * and its evaluation, re-renders on every change, posts override changes
 * to /whatif (latest response wins), and commits accepted scenarios back
 * through PUT /model.
 */

import type { GoalService } from "./api.js";
import { layoutModel } from "./layout.js";
import {
  buildConfidencePicker,
  buildObjectiveForm,
  buildRequirementForm,
  formErrors,
} from "./forms.js";
import {
  STATUS_COLOURS,
  highlightFromAttributions,
  renderGraph,
  type ChainHighlight,
} from "./render.js";
import type {
  AttributionJson,
  DiffJson,
  ModelJson,
  PromptJson,
  ReportJson,
  StatusValue,
} from "./types.js";
import { LatestWins, OverrideSet } from "./whatif.js";

export interface AppElements {
  graph: HTMLElement;
  form: HTMLElement;
  prompts: HTMLElement;
  whatif: HTMLElement;
  banner: HTMLElement;
}

export class App {
  model: ModelJson | null = null;
  report: ReportJson | null = null;
  diff: DiffJson | null = null;
  prompts: PromptJson[] = [];
  selection: string | null = null;
  highlight: ChainHighlight | null = null;
  readonly overrides = new OverrideSet();
  private readonly sequencer = new LatestWins();

  constructor(
    private readonly api: GoalService,
    private readonly el: AppElements,
  ) {}

  private get doc(): Document {
    return this.el.graph.ownerDocument;
  }

  async start(): Promise<void> {
    try {
      await this.reload();
      this.el.banner.textContent = "";
      this.el.banner.classList.remove("visible");
    } catch (error) {
      this.showBanner(`service unreachable: ${(error as Error).message}`);
      throw error;
    }
  }

  showBanner(message: string): void {
    this.el.banner.textContent = message;
    this.el.banner.classList.add("visible");
    const retry = this.doc.createElement("button");
    retry.textContent = "retry";
    retry.addEventListener("click", () => void this.start());
    this.el.banner.appendChild(retry);
  }

  /** Fetch snapshot + evaluation + prompts; evaluation is never older than
   * the snapshot it decorates because both load here, in order. */
  async reload(): Promise<void> {
    this.model = await this.api.getModel();
    this.report = await this.api.evaluate();
    this.prompts = await this.api.prompts();
    this.diff = null;
    if (this.overrides.size > 0) {
      this.diff = await this.api.whatif(this.overrides.toScenario());
    }
    this.render();
  }

  /** Status shown on the canvas: scenario result while overrides are live,
   * baseline otherwise. */
  statusFor(objectiveId: string): StatusValue | undefined {
    if (this.diff) {
      const row = this.diff.objectives.find((o) => o.id === objectiveId);
      if (row) return row.scenario.status;
    }
    return this.report?.objectives.find((o) => o.id === objectiveId)?.status;
  }

  statuses(): Map<string, StatusValue> {
    const map = new Map<string, StatusValue>();
    for (const objective of this.model?.objectives ?? []) {
      const status = this.statusFor(objective.id);
      if (status) map.set(objective.id, status);
    }
    return map;
  }

  render(): void {
    if (!this.model) return;
    if (this.model.objectives.length + this.model.requirements.length === 0) {
      this.el.graph.textContent = "empty model: add your first objective";
      this.renderPrompts();
      this.renderWhatif();
      return;
    }
    const layout = layoutModel(this.model);
    renderGraph(this.el.graph, this.model, layout, this.statuses(), this.highlight, {
      onNodeClick: (id) => void this.select(id),
      onLinkClick: (id) => this.openContributionEditor(id),
    });
    this.renderPrompts();
    this.renderWhatif();
  }

  async select(id: string): Promise<void> {
    this.selection = id;
    this.highlight = null;
    const model = this.model;
    if (!model) return;
    const requirement = model.requirements.find((r) => r.id === id);
    if (requirement) {
      const targets = model.objectives.filter((o) => o.top_level).map((o) => o.id);
      const attributions: AttributionJson[] = [];
      for (const target of targets) {
        attributions.push(await this.api.attribution(id, target));
      }
      this.highlight = highlightFromAttributions(attributions);
      this.openForm(buildRequirementForm(this.doc, requirement));
    }
    const objective = model.objectives.find((o) => o.id === id);
    if (objective) {
      this.openForm(buildObjectiveForm(this.doc, objective));
    }
    this.render();
  }

  private openForm(form: HTMLFormElement): void {
    const errorBox = this.doc.createElement("p");
    errorBox.className = "form-errors";
    const save = this.doc.createElement("button");
    save.type = "submit";
    save.textContent = "save";
    form.appendChild(save);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const missing = formErrors(form);
      if (missing.length > 0) {
        errorBox.textContent = `required: ${missing.join(", ")}`;
        return;
      }
      errorBox.textContent = "";
    });
    this.el.form.replaceChildren(form, errorBox);
  }

  openContributionEditor(linkId: string): void {
    const link = this.model?.contributions.find((l) => l.id === linkId);
    if (!link) return;
    const panel = this.doc.createElement("div");
    panel.className = "contribution-editor";
    const heading = this.doc.createElement("h3");
    heading.textContent = `${link.id}: ${link.source} -> ${link.target}`;
    panel.appendChild(heading);
    const picker = buildConfidencePicker(
      this.doc,
      this.overrides.confidences.get(link.id) ?? link.confidence,
      (value) => void this.setConfidenceOverride(link.id, value),
    );
    panel.appendChild(picker.root);
    this.el.form.replaceChildren(panel);
  }

  renderPrompts(): void {
    const list = this.doc.createElement("ul");
    list.className = "prompt-list";
    for (const prompt of this.prompts) {
      const item = this.doc.createElement("li");
      const button = this.doc.createElement("button");
      button.textContent = `${prompt.subject}: ${prompt.question}`;
      button.dataset.subject = prompt.subject;
      button.addEventListener("click", () => void this.select(prompt.subject));
      item.appendChild(button);
      list.appendChild(item);
    }
    if (this.prompts.length === 0) {
      const done = this.doc.createElement("p");
      done.textContent = "no prompts; the model is fully linked";
      this.el.prompts.replaceChildren(done);
      return;
    }
    this.el.prompts.replaceChildren(list);
  }

  renderWhatif(): void {
    const model = this.model;
    if (!model) return;
    const doc = this.doc;
    const panel = doc.createElement("div");
    panel.className = "whatif-controls";

    for (const link of model.contributions) {
      const row = doc.createElement("div");
      row.className = "whatif-row";
      const caption = doc.createElement("span");
      caption.textContent = `conf(${link.id})`;
      const slider = doc.createElement("input");
      slider.type = "range";
      slider.min = "0.05";
      slider.max = "1";
      slider.step = "0.05";
      slider.value = String(this.overrides.confidences.get(link.id) ?? link.confidence);
      slider.dataset.link = link.id;
      slider.className = "confidence-slider";
      slider.addEventListener("input", () => {
        void this.setConfidenceOverride(link.id, Number(slider.value));
      });
      row.appendChild(caption);
      row.appendChild(slider);
      panel.appendChild(row);
    }

    for (const requirement of model.requirements) {
      const row = doc.createElement("label");
      row.className = "whatif-row";
      const box = doc.createElement("input");
      box.type = "checkbox";
      box.checked = this.overrides.exclusions.get(requirement.id) ?? requirement.included;
      box.dataset.requirement = requirement.id;
      box.className = "include-toggle";
      box.addEventListener("change", () => {
        void this.setInclusionOverride(requirement.id, box.checked);
      });
      row.appendChild(box);
      row.appendChild(doc.createTextNode(` include ${requirement.id}`));
      panel.appendChild(row);
    }

    const groups = new Map<string, string[]>();
    for (const link of model.contributions) {
      if (link.or_group) {
        const members = groups.get(link.or_group) ?? [];
        members.push(link.id);
        groups.set(link.or_group, members);
      }
    }
    for (const [group, members] of [...groups].sort()) {
      const row = doc.createElement("div");
      row.className = "whatif-row or-group";
      row.appendChild(doc.createTextNode(`or(${group}): `));
      for (const member of members.sort()) {
        const label = doc.createElement("label");
        const radio = doc.createElement("input");
        radio.type = "radio";
        radio.name = `or-${group}`;
        radio.value = member;
        radio.checked = this.overrides.orSelections.get(group) === member;
        radio.addEventListener("change", () => {
          void this.setOrSelection(group, member);
        });
        label.appendChild(radio);
        label.appendChild(doc.createTextNode(member));
        row.appendChild(label);
      }
      panel.appendChild(row);
    }

    const chips = doc.createElement("div");
    chips.className = "diff-chips";
    if (this.diff) {
      for (const row of this.diff.objectives) {
        const chip = doc.createElement("span");
        chip.className = "chip";
        chip.dataset.objective = row.id;
        chip.dataset.baseline = row.baseline.status;
        chip.dataset.scenario = row.scenario.status;
        chip.style.background = STATUS_COLOURS[row.scenario.status];
        chip.textContent = row.status_changed
          ? `${row.id}: ${row.baseline.status} -> ${row.scenario.status} ` +
            `(${row.delta_adjusted >= 0 ? "+" : ""}${row.delta_adjusted.toFixed(2)})`
          : `${row.id}: ${row.scenario.status}`;
        chips.appendChild(chip);
      }
    } else {
      const idle = doc.createElement("span");
      idle.textContent = "no overrides; baseline shown";
      chips.appendChild(idle);
    }
    panel.appendChild(chips);

    const commit = doc.createElement("button");
    commit.textContent = "commit scenario";
    commit.className = "commit-button";
    commit.disabled = this.overrides.size === 0;
    commit.addEventListener("click", () => void this.commit());
    const reset = doc.createElement("button");
    reset.textContent = "reset";
    reset.className = "reset-button";
    reset.addEventListener("click", () => void this.resetOverrides());
    panel.appendChild(commit);
    panel.appendChild(reset);

    this.el.whatif.replaceChildren(panel);
  }

  async setConfidenceOverride(link: string, value: number): Promise<void> {
    this.overrides.setConfidence(link, value);
    await this.refreshDiff();
  }

  async setInclusionOverride(requirement: string, included: boolean): Promise<void> {
    this.overrides.setIncluded(requirement, included);
    await this.refreshDiff();
  }

  async setOrSelection(group: string, link: string): Promise<void> {
    this.overrides.selectOr(group, link);
    await this.refreshDiff();
  }

  /** POST the current scenario; stale responses are dropped (latest wins). */
  async refreshDiff(): Promise<void> {
    if (this.overrides.size === 0) {
      this.diff = null;
      this.render();
      return;
    }
    const ticket = this.sequencer.next();
    const diff = await this.api.whatif(this.overrides.toScenario());
    if (!this.sequencer.isCurrent(ticket)) return;
    this.diff = diff;
    this.render();
  }

  async commit(): Promise<void> {
    const model = this.model;
    if (!model || this.overrides.size === 0) return;
    await this.api.putModel(this.overrides.applyTo(model));
    this.overrides.reset();
    await this.reload();
  }

  async resetOverrides(): Promise<void> {
    this.overrides.reset();
    this.diff = null;
    await this.reload();
  }
}
