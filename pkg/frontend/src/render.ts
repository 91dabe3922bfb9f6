/** SVG rendering of the goal graph with live status colouring.
 *
 * Shapes follow the notation: objectives as ellipses, requirements as
 * hexagons, soft goals as dashed ellipses. The status palette is the same
 * one the DOT export uses, so diagrams agree across surfaces.
 */

import type { Layout } from "./layout.js";
import type {
  AttributionJson,
  ContributionJson,
  ModelJson,
  StatusValue,
} from "./types.js";
import { quantityText } from "./types.js";

export const STATUS_COLOURS: Record<StatusValue, string> = {
  satisfied: "palegreen",
  in_doubt: "gold",
  unsatisfied: "lightcoral",
  undetermined: "lightgray",
};

const SVG_NS = "http://www.w3.org/2000/svg";

export interface ChainHighlight {
  /** links on any highlighted path */
  links: Set<string>;
  /** tooltip text per path, keyed by the path's final link id */
  tooltips: Map<string, string>;
}

export function confidenceText(value: number): string {
  return String(Number(value.toFixed(2)));
}

/** Tooltip for one contribution chain, e.g. "1.82 months @ conf 0.75". */
export function chainTooltip(delivered: number, unit: string, confidence: number): string {
  const amount = delivered.toFixed(2);
  const quantity = unit === "%" ? `${amount}%` : `${amount} ${unit}`;
  return `${quantity} @ conf ${confidenceText(confidence)}`;
}

export function highlightFromAttributions(attributions: AttributionJson[]): ChainHighlight {
  const links = new Set<string>();
  const tooltips = new Map<string, string>();
  for (const attribution of attributions) {
    for (const path of attribution.paths) {
      for (const link of path.links) links.add(link);
      const last = path.links[path.links.length - 1];
      if (last !== undefined) {
        tooltips.set(
          last,
          chainTooltip(path.delivered_amount, attribution.unit, path.compound_confidence),
        );
      }
    }
  }
  return { links, tooltips };
}

export function edgeLabel(link: ContributionJson): string {
  const parts = [quantityText(link.amount)];
  if (link.activity) parts.push(link.activity);
  parts.push(`[conf ${confidenceText(link.confidence)}]`);
  if (link.combinator === "and") parts.push("&");
  if (link.combinator === "or") parts.push(`|${link.or_group ?? ""}`);
  return parts.join(" ");
}

export interface RenderCallbacks {
  onNodeClick?: (id: string) => void;
  onLinkClick?: (id: string) => void;
}

function element<K extends keyof SVGElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const node = doc.createElementNS(SVG_NS, tag);
  for (const [name, value] of Object.entries(attrs)) node.setAttribute(name, value);
  return node;
}

function hexagonPoints(x: number, y: number, w: number, h: number): string {
  const dx = w / 2;
  const dy = h / 2;
  const notch = w * 0.18;
  return [
    [x - dx + notch, y - dy],
    [x + dx - notch, y - dy],
    [x + dx, y],
    [x + dx - notch, y + dy],
    [x - dx + notch, y + dy],
    [x - dx, y],
  ]
    .map(([px, py]) => `${px},${py}`)
    .join(" ");
}

export function renderGraph(
  container: HTMLElement,
  model: ModelJson,
  layout: Layout,
  statuses: Map<string, StatusValue>,
  highlight: ChainHighlight | null,
  callbacks: RenderCallbacks = {},
): SVGSVGElement {
  const doc = container.ownerDocument;
  const svg = element(doc, "svg", {
    viewBox: `0 0 ${layout.width} ${layout.height}`,
    width: String(layout.width),
    height: String(layout.height),
    class: "goal-graph",
  });

  const edgeStyles: [string, string, string][] = [];
  for (const link of model.contributions) {
    edgeStyles.push([link.id, link.source, link.target]);
  }

  const lineFor = (
    id: string,
    from: string,
    to: string,
    cls: string,
    dash: string | null,
  ): SVGGElement | null => {
    const a = layout.positions.get(from);
    const b = layout.positions.get(to);
    if (!a || !b) return null;
    const group = element(doc, "g", { class: cls, "data-link-id": id });
    const line = element(doc, "line", {
      x1: String(a.x),
      y1: String(a.y),
      x2: String(b.x),
      y2: String(b.y),
      stroke: "#555",
      "stroke-width": highlight?.links.has(id) ? "3.5" : "1.4",
    });
    if (dash) line.setAttribute("stroke-dasharray", dash);
    if (highlight?.links.has(id)) {
      group.classList.add("highlighted");
      line.setAttribute("stroke", "#d97706");
    }
    group.appendChild(line);
    return group;
  };

  for (const link of model.decompositions) {
    const group = lineFor(link.id, link.parent, link.child, "edge decomposition", "7,4");
    if (group) svg.appendChild(group);
  }
  for (const link of model.traces) {
    const group = lineFor(link.id, link.source, link.target, "edge trace", "2,4");
    if (group) svg.appendChild(group);
  }
  for (const link of model.contributions) {
    const group = lineFor(link.id, link.source, link.target, "edge contribution", null);
    if (!group) continue;
    const a = layout.positions.get(link.source)!;
    const b = layout.positions.get(link.target)!;
    const label = element(doc, "text", {
      x: String((a.x + b.x) / 2),
      y: String((a.y + b.y) / 2 - 6),
      "text-anchor": "middle",
      class: "edge-label",
    });
    label.textContent = edgeLabel(link);
    group.appendChild(label);
    const tooltip = highlight?.tooltips.get(link.id);
    if (tooltip) {
      const title = element(doc, "title", {});
      title.textContent = tooltip;
      group.appendChild(title);
      const chip = element(doc, "text", {
        x: String((a.x + b.x) / 2),
        y: String((a.y + b.y) / 2 + 14),
        "text-anchor": "middle",
        class: "chain-tooltip",
      });
      chip.textContent = tooltip;
      group.appendChild(chip);
    }
    if (callbacks.onLinkClick) {
      group.addEventListener("click", () => callbacks.onLinkClick?.(link.id));
    }
    svg.appendChild(group);
  }

  const addLabel = (x: number, y: number, text: string): SVGTextElement => {
    const label = element(doc, "text", {
      x: String(x),
      y: String(y + 4),
      "text-anchor": "middle",
      class: "node-label",
    });
    label.textContent = text.length > 46 ? `${text.slice(0, 44)}…` : text;
    const title = element(doc, "title", {});
    title.textContent = text;
    label.appendChild(title);
    return label;
  };

  for (const objective of model.objectives) {
    const pos = layout.positions.get(objective.id);
    if (!pos) continue;
    const group = element(doc, "g", {
      class: "node objective",
      "data-node-id": objective.id,
    });
    const status = statuses.get(objective.id);
    const shape = element(doc, "ellipse", {
      cx: String(pos.x),
      cy: String(pos.y),
      rx: "105",
      ry: "34",
      fill: status ? STATUS_COLOURS[status] : "white",
      stroke: "#333",
      "data-status": status ?? "none",
    });
    group.appendChild(shape);
    group.appendChild(addLabel(pos.x, pos.y, objective.label));
    if (callbacks.onNodeClick) {
      group.addEventListener("click", () => callbacks.onNodeClick?.(objective.id));
    }
    svg.appendChild(group);
  }

  for (const requirement of model.requirements) {
    const pos = layout.positions.get(requirement.id);
    if (!pos) continue;
    const group = element(doc, "g", {
      class: "node requirement",
      "data-node-id": requirement.id,
    });
    const shape = element(doc, "polygon", {
      points: hexagonPoints(pos.x, pos.y, 210, 64),
      fill: requirement.included ? "#eef2ff" : "#e5e7eb",
      stroke: "#333",
    });
    group.appendChild(shape);
    group.appendChild(addLabel(pos.x, pos.y, requirement.label));
    if (callbacks.onNodeClick) {
      group.addEventListener("click", () => callbacks.onNodeClick?.(requirement.id));
    }
    svg.appendChild(group);
  }

  for (const goal of model.softgoals) {
    const pos = layout.positions.get(goal.id);
    if (!pos) continue;
    const group = element(doc, "g", { class: "node softgoal", "data-node-id": goal.id });
    const shape = element(doc, "ellipse", {
      cx: String(pos.x),
      cy: String(pos.y),
      rx: "105",
      ry: "34",
      fill: "white",
      stroke: "#333",
      "stroke-dasharray": "6,4",
    });
    group.appendChild(shape);
    group.appendChild(addLabel(pos.x, pos.y, goal.statement));
    svg.appendChild(group);
  }

  container.replaceChildren(svg);
  return svg;
}
